//! Generate a corrupted dataset, save it in the text format and read it back.

use caznrls::simulation::{generate, load_dataset, save_dataset, ExampleId, ScenarioSpec};

fn main() -> caznrls::Result<()> {
    for ex in [ExampleId::Ex1, ExampleId::Ex3, ExampleId::Ex6, ExampleId::Ex8] {
        let spec = ScenarioSpec::new(ex, 100, 4.0, 0.5, 1);
        let ds = generate(&spec)?;
        println!("{ex}: n = {}, s = {}, corruption {} (tau {})", ds.n(), ds.support.len(), ds.corruption, ds.tau);
    }

    let ds = generate(&ScenarioSpec::new(ExampleId::Ex2, 50, 4.0, 0.5, 2))?;
    let path = std::env::temp_dir().join("caznrls_example_dataset.txt");
    save_dataset(&ds, &path)?;
    let back = load_dataset(&path)?;
    println!("saved to {}; round trip exact: {}", path.display(), back.z == ds.z && back.y == ds.y);
    Ok(())
}
