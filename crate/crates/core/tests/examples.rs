//! Every example under examples/ runs to completion.

macro_rules! example {
    ($module:ident, $file:literal, $test:ident) => {
        #[allow(dead_code)]
        mod $module {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }

        #[test]
        fn $test() {
            $module::run_example().expect(concat!($file, " failed"));
        }
    };
}

example!(steady_state_example, "steady_state.rs", steady_state_runs);
example!(sr_peak_example, "sr_peak.rs", sr_peak_runs);
example!(optimal_drive_example, "optimal_drive.rs", optimal_drive_runs);
example!(lindblad_example, "lindblad_vs_bloch.rs", lindblad_vs_bloch_runs);
example!(rwa_example, "rwa_check.rs", rwa_check_runs);
example!(
    inversion_recovery_example,
    "inversion_recovery.rs",
    inversion_recovery_runs
);
example!(carr_purcell_example, "carr_purcell.rs", carr_purcell_runs);
example!(long_pulse_example, "long_pulse.rs", long_pulse_runs);
example!(manifest_example, "manifest.rs", manifest_runs);
