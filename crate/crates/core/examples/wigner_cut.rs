//! Joint Wigner function of the odd cat state on the plane Im sigma = Im chi = 0,
//! drawn as a character map: `#`/`+` positive, `-`/`=` negative.

use molcav::analysis::{joint_wigner, WIGNER_MAX};
use molcav::analytic::{analytic_state, cat_state};
use molcav::dynamics::linspace;
use molcav::hilbert::{FockCutoffs, Sign, C64};
use molcav::model::{derive_effective, ModelParams};

fn main() -> molcav::Result<()> {
    let p = ModelParams::default();
    let e = derive_effective(&p)?;
    let s = analytic_state(&p, &e, e.detection_time()?)?;
    let cat = cat_state(&s, Sign::Minus, FockCutoffs::new(28, 27)?)?.value;

    let axis: Vec<C64> = linspace(-4.0, 4.0, 40).into_iter().map(|x| C64::new(x, 0.0)).collect();
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let grid = joint_wigner(&cat, &axis, &axis, threads)?;

    for j in (0..axis.len()).rev() {
        let line: String = (0..axis.len())
            .map(|i| match grid.values[(i, j)] / WIGNER_MAX {
                w if w > 0.3 => '#',
                w if w > 0.05 => '+',
                w if w < -0.3 => '=',
                w if w < -0.05 => '-',
                _ => '.',
            })
            .collect();
        println!("{line}");
    }
    println!("min {:.4}, max {:.4} (bound {WIGNER_MAX:.4})", grid.min(), grid.max());
    println!("alpha = {:.3}, beta = {:.3}", s.alpha, s.beta);
    Ok(())
}
