// Experiment manifests and CSV output: run a custom sweep described in
// TOML and read the file back.

use bloch_sr::io::{parse_manifest, read_sweep_csv, write_sweep_csv, SweepKind};
use bloch_sr::sr_analysis::{sweep, Control};

const MANIFEST: &str = r#"
[ratio_demo]
description = "T1 = 2 T2 is still a valid sample"
rabi_hz = [5.0]
s_eq = 0.5
sweep = "t12"
sweep_min = "2ms"
sweep_max = "200ms"
sweep_points = 60
sweep_scale = "log"
"#;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    for m in parse_manifest(MANIFEST)? {
        let spec = m.sweep.expect("sweep experiment");
        assert_eq!(spec.kind, SweepKind::T12);
        for (i, p) in m.params.iter().enumerate() {
            let r = sweep(Control::T12 { ratio: 1.0 }, p, &spec.grid())?;
            let path = dir.path().join(m.file_name(i, ""));
            write_sweep_csv(&r, &path)?;
            let back = read_sweep_csv(&path)?;
            println!(
                "{}: {} rows, header `{}`",
                path.display(),
                back.rows.len(),
                back.schema.header_line()
            );
            for line in &back.metadata {
                println!("  # {line}");
            }
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
