//! Lindblad evolution with cavity, vibrational and electronic decay; the
//! detection probabilities relax towards 1/2 as the electronic coherence
//! is lost.

use molcav::analysis::{detection_probability, fidelity_mixed, project_electronic_mixed, log_negativity};
use molcav::analytic::{analytic_state, full_state_analytic};
use molcav::dynamics::{evolve_lindblad_observe, linspace, IntegratorOptions};
use molcav::hilbert::{CompositeSpace, FockCutoffs, Sign, StateVector};
use molcav::model::{derive_effective, ModelParams};

fn main() -> molcav::Result<()> {
    let p = ModelParams {
        omega_c: 100.0,
        omega_v: 101.0,
        delta_a_spec: -1.0,
        kappa: 0.05,
        gamma_v: 0.001,
        gamma_e: 0.5,
        ..ModelParams::default()
    };
    let e = derive_effective(&p)?;
    let space = CompositeSpace::new(FockCutoffs::new(6, 6)?)?;
    let rho0 = StateVector::initial_plus(space).to_density();
    let opts = IntegratorOptions::with_samples(linspace(0.0, 2.0, 8)[1..].to_vec());

    println!("    t      p+      f     N+    trace drift");
    let run = evolve_lindblad_observe(&p, &e, &rho0, &opts, |t, rho| {
        let f = fidelity_mixed(&full_state_analytic(&analytic_state(&p, &e, t)?, space)?.value, rho)?;
        let n = log_negativity(&project_electronic_mixed(rho, Sign::Plus)?.collapsed)?;
        println!(
            "{t:>6.3} {:>7.4} {f:>7.4} {n:>6.3} {:>10.1e}",
            detection_probability(rho, Sign::Plus)?,
            (rho.trace().re - 1.0).abs()
        );
        Ok(())
    })?;
    let checked = run.monitors.iter().filter(|m| m.positive.is_some()).count();
    println!("positivity checked on {checked} samples, flags: {}", run.monitors.iter().map(|m| m.flags.len()).sum::<usize>());
    Ok(())
}
