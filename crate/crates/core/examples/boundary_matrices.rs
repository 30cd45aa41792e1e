// Signed boundary matrices of the standard simplex.

use hyperharmonic::complex::{boundary_matrix, enumerate_simplices, SimplexId};

pub fn main() -> hyperharmonic::Result<()> {
    let top = 3;
    for n in 0..=top {
        let b = boundary_matrix(top, n)?;
        let (rows, cols) = b.shape();
        println!("B_{n}: {rows} x {cols}");
        let columns: Vec<String> = enumerate_simplices(top, n)?.iter().map(SimplexId::to_string).collect();
        println!("      {}", columns.join(" "));
        for row in b.to_dense_i64() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>2}")).collect();
            println!("      {}", cells.join(" "));
        }
    }
    // composing consecutive boundaries gives zero
    for n in 1..=top {
        let product = boundary_matrix(top, n - 1)?.to_dense() * boundary_matrix(top, n)?.to_dense();
        println!("|B_{} B_{n}| = {}", n - 1, product.amax());
    }
    Ok(())
}
