//! First-integral drift along the magnetic geodesic flow for the degree-1
//! family, its square, and a perturbed magnetic field.

use magflow::fields::{FourierFieldSpec, PowerField};
use magflow::flow::{order_check, FlowState, MagneticFlow, OmegaModel};

fn main() -> magflow::Result<()> {
    let spec = FourierFieldSpec::y_family(0.3, 0.2, 1.0, 1.0)?;
    let s0 = FlowState::new(0.0, 0.0, 0.3);
    let exact = MagneticFlow::new(&spec, OmegaModel::derived());
    println!("N=1 drift        {:.2e}", exact.integrate(s0, 50.0, 1e-3)?.max_drift());
    let off = MagneticFlow::new(&spec, OmegaModel::Derived { scale: 1.1 });
    println!("Omega x 1.1      {:.2e}", off.integrate(s0, 50.0, 1e-3)?.max_drift());
    let sq = PowerField::new(spec.clone(), 2);
    let sq_flow = MagneticFlow::new(&sq, OmegaModel::derived());
    println!("N=2 squared      {:.2e}", sq_flow.integrate(s0, 50.0, 1e-3)?.max_drift());
    let oc = order_check(&exact, s0, 10.0, 0.05)?;
    println!("RK4 error ratio  {:.2}", oc.ratio);
    Ok(())
}
