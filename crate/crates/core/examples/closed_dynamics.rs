//! Exact Schrodinger evolution under the full modulated Hamiltonian,
//! compared sample by sample with the analytic solution.

use molcav::analysis::{detection_probability, fidelity_pure, mean_excitations};
use molcav::analytic::{analytic_state, full_state_analytic};
use molcav::dynamics::{evolve_schrodinger, linspace, IntegratorOptions};
use molcav::hilbert::{CompositeSpace, Sign, StateVector};
use molcav::model::{derive_effective, suggested_cutoffs, ModelParams};

fn main() -> molcav::Result<()> {
    let p = ModelParams::default();
    let e = derive_effective(&p)?;
    let cutoffs = suggested_cutoffs(&e, 1e-7)?;
    println!("cutoffs {}/{}", cutoffs.n_a_max, cutoffs.n_b_max);
    let space = CompositeSpace::new(cutoffs)?;
    let times = linspace(0.0, 0.25 * e.period()?, 10);
    let opts = IntegratorOptions::with_samples(times[1..].to_vec());
    let traj = evolve_schrodinger(&p, &e, &StateVector::initial_plus(space), &opts)?;

    println!("     t      P+       F      <n_a>   <n_b>   top pop");
    for ((t, psi), mon) in traj.times.iter().zip(&traj.states).zip(&traj.monitors) {
        let s = analytic_state(&p, &e, *t)?;
        let f = fidelity_pure(&full_state_analytic(&s, space)?.value, psi)?;
        let (na, nb) = mean_excitations(psi);
        println!(
            "{t:>7.3} {:>7.4} {f:>8.5} {na:>7.4} {nb:>7.4} {:>9.1e}",
            detection_probability(psi, Sign::Plus)?,
            mon.top_population
        );
    }
    println!("RK4 step {:.3e}, frame {}", traj.step.unwrap_or(f64::NAN), traj.frame.name());
    Ok(())
}
