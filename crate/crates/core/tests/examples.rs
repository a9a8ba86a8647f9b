//! Runs every example end to end.

macro_rules! example {
    ($name:ident, $file:literal) => {
        #[path = $file]
        mod $name;

        #[test]
        fn $name() {
            $name::run_example().unwrap();
        }
    };
}

example!(classical_spectra, "../examples/classical_spectra.rs");
example!(convergence_rates, "../examples/convergence_rates.rs");
example!(duhamel_identity, "../examples/duhamel_identity.rs");
example!(experiment_run, "../examples/experiment_run.rs");
example!(gradient_floor, "../examples/gradient_floor.rs");
example!(minimax_family, "../examples/minimax_family.rs");
example!(reflected_diffusion, "../examples/reflected_diffusion.rs");
example!(stability_probe, "../examples/stability_probe.rs");
