//! Run the bundled evaluation recipe from YAML.

use obench::grid::write_grid;
use obench::pipeline::{gulfstream_recipe, parse_config, run_pipeline, Context};
use obench::synthetic::{eddy_field, EddyConfig};

fn main() -> obench::Result<()> {
    let dir = std::env::temp_dir().join("obench-recipe-example");
    std::fs::create_dir_all(&dir)?;
    let truth = eddy_field(&EddyConfig::default())?;
    let study = truth.with_data(truth.data().mapv(|v| 0.8 * v))?;
    write_grid(&truth, dir.join("truth.obg"))?;
    write_grid(&study, dir.join("study.obg"))?;

    let yaml = gulfstream_recipe("study.obg", "truth.obg", "scale.json");
    println!("{yaml}");
    let (_, manifest) = run_pipeline(&parse_config(&yaml)?, &Context::new(&dir))?;
    for (i, step) in manifest.steps.iter().enumerate() {
        println!("{i}: {:<16} {} -> {}  {:.1} ms", step.op, &step.in_hash[..12], &step.out_hash[..12], step.ms);
    }
    if let Some(v) = &manifest.steps.last().and_then(|s| s.value.clone()) {
        println!("resolved scale: {v}");
    }
    Ok(())
}
