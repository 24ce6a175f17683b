//! Closed-form conditional cat states at the detection time: coherent
//! amplitudes, detection probabilities and the entanglement of both
//! branches.

use molcav::analysis::log_negativity_pure;
use molcav::analytic::{analytic_state, cat_state, detection_prob_analytic, mean_excitations_analytic};
use molcav::hilbert::{FockCutoffs, Sign};
use molcav::model::{derive_effective, ModelParams};

fn main() -> molcav::Result<()> {
    let p = ModelParams::default();
    let e = derive_effective(&p)?;
    let ts = e.detection_time()?;
    let s = analytic_state(&p, &e, ts)?;
    println!("t_s = {ts:.4}");
    println!("alpha = {:.4}  |alpha| = {:.4}", s.alpha, s.alpha.norm());
    println!("beta  = {:.4}  |beta|  = {:.4}", s.beta, s.beta.norm());
    let (pp, pm) = detection_prob_analytic(&s);
    println!("P+ = {pp:.6}, P- = {pm:.6}");
    let (na, nb) = mean_excitations_analytic(&s);
    println!("<n_a> = {na:.4}, <n_b> = {nb:.4}");

    let cutoffs = FockCutoffs::new(28, 27)?;
    for sign in Sign::ALL {
        let cat = cat_state(&s, sign, cutoffs)?;
        println!(
            "cat({}) truncation deficit {:.1e}, log-negativity {:.6}",
            sign.symbol(),
            cat.deficit,
            log_negativity_pure(&cat.value)?
        );
    }
    Ok(())
}
