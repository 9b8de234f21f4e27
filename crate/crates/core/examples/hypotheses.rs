//! Samples the growth hypotheses for a sublinear and a superlinear family.

use fracplap::nonlinearity::{validate_hypotheses, Coefficient, NonlinearitySpec, Regime};
use fracplap::FracParams;

fn main() -> fracplap::Result<()> {
    let params = FracParams::new(0.6, 2.0, 1.0)?;
    let cases = [
        ("sublinear q=1.5", NonlinearitySpec::sublinear(1.5, Coefficient::constant(1.0)), Regime::Sublinear),
        ("superlinear mu=4", NonlinearitySpec::superlinear(4.0), Regime::Superlinear),
    ];
    for (name, spec, regime) in cases {
        let report = validate_hypotheses(&spec, &params, regime, 1000, 42);
        println!("{name}:");
        for r in &report.records {
            println!("  {} holds={} worst margin {:.3e} at {:?}", r.id, r.holds, r.worst_margin, r.witness);
        }
    }
    Ok(())
}
