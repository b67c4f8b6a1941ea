// Scratch calibration of the g(r) liquid criterion at desk scale.
// Run: cargo run -p phasegrain --example calibrate_melt

use phasegrain::builder::{build_fcc, dilute_to_density, melt_quench, MeltQuenchParams, Orientation, RdfSignature};
use phasegrain::dynamics::{run_trajectory, IntegratorParams, TrajectoryHooks, TrajectoryState};
use phasegrain::observables::rdf;
use phasegrain::potential::PotentialTable;

fn main() {
    let table = PotentialTable::default_table();
    let solid = build_fcc(Orientation::O1, [8.7, 8.7, 8.7], 1.296).unwrap();
    println!("solid N = {}", solid.len());

    // Crystal signature at T = 2.9 (should NOT look liquid).
    let params = IntegratorParams {
        dt: 1e-4,
        temperature: 2.9,
        seed: 11,
        n_steps: 5000,
        sample_every: 1000,
        ..Default::default()
    };
    let mut state = TrajectoryState::fresh(solid.clone(), &params);
    let mut samples = Vec::new();
    let mut hooks = TrajectoryHooks {
        on_sample: Some(Box::new(|_, cfg: &phasegrain::Configuration| {
            samples.push(cfg.clone());
            Ok(())
        })),
        on_checkpoint: None,
    };
    run_trajectory(&mut state, &params, &table, &mut hooks).unwrap();
    drop(hooks);
    let curve = rdf(&samples, None, 150, 3.0).unwrap();
    let sig = RdfSignature::measure(&curve);
    println!(
        "thermal FCC at T=2.9: min/peak = {:.3}, second-shell maxima = {}",
        sig.min_to_peak, sig.second_shell_maxima
    );

    // Diluted crystal, melt at 5.8, quench to 2.9.
    let (diluted, removed) = dilute_to_density(&solid, 1.241, 11).unwrap();
    println!("diluted: removed {removed}, N = {}", diluted.len());
    let mq = MeltQuenchParams {
        t_high: 5.8,
        t_target: 2.9,
        target_density: None,
        seed: 11,
        ..Default::default()
    };
    match melt_quench(&diluted, &table, &mq) {
        Ok((liquid, report)) => {
            println!(
                "melt rounds = {}, melt min/peak = {:.3} (maxima {}), quench min/peak = {:.3} (maxima {})",
                report.melt_rounds,
                report.melt_signature.min_to_peak,
                report.melt_signature.second_shell_maxima,
                report.quench_signature.min_to_peak,
                report.quench_signature.second_shell_maxima
            );
            println!("liquid N = {}", liquid.len());
            let (peak_r, peak) = report.quench_curve.first_peak();
            println!("quench first peak: r = {peak_r:.3}, g = {peak:.3}");
            let (min_r, min_v) = report.quench_curve.first_minimum_after_peak(peak_r + 0.8);
            println!("quench first min : r = {min_r:.3}, g = {min_v:.3}");
            for (r, g) in report.quench_curve.r.iter().zip(&report.quench_curve.g) {
                if *r > 2.4 {
                    // tail flatness check region
                    print!("({r:.2},{g:.2}) ");
                }
            }
            println!();
        }
        Err(e) => println!("melt_quench failed: {e}"),
    }
}
