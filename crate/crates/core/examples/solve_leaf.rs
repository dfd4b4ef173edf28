//! Solves a single constant-mean-curvature leaf with each solver mode.

use cmcfol::metric::{HarmonicAsymptotics, MetricFamily};
use cmcfol::solver::solve_leaf_for_mean_curvature;
use cmcfol::{solve_leaf, MetricField, SolveConfig, SolveMode};

fn main() -> cmcfol::Result<()> {
    let field = MetricField::new(MetricFamily::HarmonicAsymptotics(HarmonicAsymptotics::new(
        1.0,
        [0.5, 0.0, 0.0],
    )));
    for mode in [
        SolveMode::PaperTwoPhase,
        SolveMode::NewtonDirect,
        SolveMode::TwoPhaseThenNewton,
    ] {
        let cfg = SolveConfig {
            mode,
            ..SolveConfig::with_lmax(10)
        };
        let res = solve_leaf(&field, 30.0, &cfg)?;
        println!(
            "{mode:?}: H = {:.12}, center = [{:.6}, {:.6}, {:.6}], residual {:.1e}, {} outer / {} newton",
            res.h_achieved,
            res.center[0],
            res.center[1],
            res.center[2],
            res.residual,
            res.iterations,
            res.newton_iterations
        );
    }
    let target = 0.06;
    let res = solve_leaf_for_mean_curvature(&field, target, &SolveConfig::with_lmax(10))?;
    println!(
        "prescribed H = {target}: radius {:.6}, achieved {:.12}",
        res.radius, res.h_achieved
    );
    Ok(())
}
