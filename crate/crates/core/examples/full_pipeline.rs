// The file-based pipeline: CSV in, output bundle with manifest out.

use std::fs;

use hyperharmonic::pipeline::{components_table, replay, run_pipeline, PipelineConfig};
use hyperharmonic::synth::{random_rank_covariance, sample_gaussian};

pub fn main() -> hyperharmonic::Result<()> {
    let dir = std::env::temp_dir().join("hyperharmonic-full-pipeline");
    let _ = fs::remove_dir_all(&dir);
    let input = dir.join("data.csv");
    let table = sample_gaussian(&random_rank_covariance(6, 2, 1)?, 2_000, 2)?;
    hyperharmonic::io::write_continuous_csv(&input, &table)?;

    let mut config = PipelineConfig::from_key_values("kind = continuous\nmeasures = oinfo, sinfo\nrandom_bases = 20\nseed = 5\n")?;
    config.input = input;
    config.output = dir.join("run");
    let summary = run_pipeline(&config)?;
    print!("{}", components_table(&summary.analysis));
    println!("{} files listed in {}", summary.manifest.outputs.len(), summary.manifest_path.display());

    let again = replay(&summary.manifest_path, &dir.join("replay"))?;
    let same = summary
        .manifest
        .outputs
        .iter()
        .all(|f| fs::read(dir.join("run").join(f)).ok() == fs::read(dir.join("replay").join(f)).ok());
    println!("replay from manifest identical: {same} ({} files)", again.manifest.outputs.len());
    Ok(())
}
