//! Derives the hybrid-mode frequencies, sideband couplings and detunings
//! for a parameter set, then checks the rotating-wave conditions and the
//! Fock cutoffs a simulation would need.

use molcav::hilbert::FockCutoffs;
use molcav::model::{derive_effective, rwa_report, suggested_cutoffs, truncation_report, ModelParams, TRUNCATION_TAIL};

fn main() -> molcav::Result<()> {
    let p = ModelParams::default();
    let e = derive_effective(&p)?;
    println!("{p:#?}\n{e:#?}");
    println!("t_s = {:.4}, period = {:.4}", e.detection_time()?, e.period()?);

    let (amax, bmax) = e.amplitude_bounds();
    println!("amplitude bounds: |alpha| <= {amax:.3}, |beta| <= {bmax:.3}");
    let c = suggested_cutoffs(&e, TRUNCATION_TAIL)?;
    println!("suggested cutoffs: {c:?}");

    let report = rwa_report(&p, &e);
    println!("RWA check at the baseline: {} finding(s)", report.diagnostics.len());

    let slow = ModelParams { omega_c: 8.0, omega_v: 8.08, ..p };
    print!("RWA check at omega_c = 8:\n{}", rwa_report(&slow, &derive_effective(&slow)?));
    print!("cutoffs (6, 6):\n{}", truncation_report(&e, &FockCutoffs::new(6, 6)?));
    Ok(())
}
