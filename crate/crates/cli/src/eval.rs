use std::io::Write;

use clap::{Args, ValueEnum};
use nees_core::elliptic::{am, complete_k, sncndn_any};
use nees_core::io::csv_row;
use nees_core::mahler4::{
    amg, g_quadrature, mahler4_closed, mahler4_direct, theta_similar, Mahler4Values, MahlerParams4,
};
use nees_core::mahler5::{legendre_e, legendre_f, legendre_pi, Amg5, Mahler5, Mahler5Values, MahlerParams5};
use nees_core::rigidbody::{rb_constants, rb_mu, rb_solution, InertiaParams, RBConstants};
use nees_core::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Function {
    Sn,
    Cn,
    Dn,
    Am,
    #[value(name = "K")]
    K,
    Sng,
    Cng,
    Dng,
    Fng,
    /// All four of sng, cng, dng, fng.
    Mahler4,
    Amg,
    #[value(name = "G")]
    G,
    #[value(name = "Sng")]
    Sng5,
    #[value(name = "Cng")]
    Cng5,
    #[value(name = "Dng")]
    Dng5,
    #[value(name = "Fng")]
    Fng5,
    #[value(name = "Hng")]
    Hng5,
    /// All five of Sng, Cng, Dng, Fng, Hng.
    Mahler5,
    #[value(name = "Amg")]
    Amg5,
    #[value(name = "Pi")]
    Pi,
    #[value(name = "F")]
    F,
    #[value(name = "E")]
    E,
    /// The four theta-similar functions at `z` for modulus `--k`.
    ThetaSimilar,
    /// sin ν, cos ν, ν and N of the free rigid body at time t.
    RbSolution,
    /// The angle μ of the free rigid body at time t.
    RbMu,
    /// Period of ν and N.
    RbPeriod,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, allow_hyphen_values = true)]
    m: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    n: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    p: Option<f64>,
    /// Modulus for theta-similar.
    #[arg(long)]
    k: Option<f64>,
    /// Principal moments A,B,C for the rigid body.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [1.0, 2.0, 3.0])]
    inertia: Vec<f64>,
    /// Angular momentum M for the rigid body.
    #[arg(long = "big-m", default_value_t = 1.0)]
    big_m: f64,
    /// Energy h for the rigid body.
    #[arg(long, allow_hyphen_values = true)]
    h: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    from: f64,
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    to: f64,
    #[arg(long, default_value_t = 101)]
    count: usize,
    /// Evaluate at this single argument instead of the grid.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["from", "to", "count"])]
    at: Option<f64>,
}

impl EvalArgs {
    fn need(value: Option<f64>, flag: &str, function: Function) -> Result<f64> {
        value.ok_or_else(|| {
            let name = function.to_possible_value().expect("no skipped variants");
            Error::Domain(format!("{} needs --{flag}", name.get_name()))
        })
    }

    fn grid(&self) -> Result<Vec<f64>> {
        if let Some(v) = self.at {
            return Ok(vec![v]);
        }
        if self.count < 2 {
            return Err(Error::Domain("grid count must be at least 2".into()));
        }
        if !(self.from.is_finite() && self.to.is_finite()) {
            return Err(Error::Domain("grid ends must be finite".into()));
        }
        let last = self.count - 1;
        Ok((0..self.count)
            .map(|i| if i == last { self.to } else { self.from + (self.to - self.from) * i as f64 / last as f64 })
            .collect())
    }

    fn mahler4(&self, f: Function) -> Result<MahlerParams4> {
        MahlerParams4::new(Self::need(self.m, "m", f)?, Self::need(self.n, "n", f)?)
    }

    fn mahler5(&self, f: Function) -> Result<MahlerParams5> {
        MahlerParams5::new(Self::need(self.p, "p", f)?, Self::need(self.n, "n", f)?, Self::need(self.m, "m", f)?)
    }

    fn rigid_body(&self, f: Function) -> Result<(InertiaParams, RBConstants)> {
        let [a, b, c] = [self.inertia[0], self.inertia[1], self.inertia[2]];
        let inertia = InertiaParams::new(a, b, c)?;
        let k = rb_constants(&inertia, self.big_m, Self::need(self.h, "h", f)?)?;
        Ok((inertia, k))
    }
}

fn mahler4_values(v: f64, p: &MahlerParams4) -> Result<Mahler4Values> {
    if p.n() < 1.0 {
        mahler4_closed(v, p)
    } else {
        mahler4_direct(v, p)
    }
}

/// Evaluates the 5-parameter family through the amplitude when the kernel
/// is regular, else by integrating the defining system over the grid.
enum Mahler5Eval {
    Amplitude(Amg5),
    Ode(Mahler5),
}

impl Mahler5Eval {
    fn new(q: &MahlerParams5, grid: &[f64]) -> Result<Self> {
        if q.m() < 1.0 {
            return Ok(Mahler5Eval::Amplitude(Amg5::new(q)?));
        }
        let lo = grid.iter().copied().fold(0.0, f64::min);
        let hi = grid.iter().copied().fold(0.0, f64::max);
        Ok(Mahler5Eval::Ode(Mahler5::new(q, lo, hi)?))
    }

    fn values(&self, w: f64) -> Result<Mahler5Values> {
        match self {
            Mahler5Eval::Amplitude(a) => a.values(w),
            Mahler5Eval::Ode(e) => e.eval(w),
        }
    }
}

type RowFn = Box<dyn Fn(f64) -> Result<Vec<f64>>>;

fn row_fn(f: Function, a: &EvalArgs, grid: &[f64]) -> Result<RowFn> {
    use Function::*;
    Ok(match f {
        Sn | Cn | Dn => {
            let m = EvalArgs::need(a.m, "m", f)?;
            Box::new(move |u| {
                let t = sncndn_any(u, m)?;
                Ok(vec![match f {
                    Sn => t.sn,
                    Cn => t.cn,
                    _ => t.dn,
                }])
            })
        }
        Am => {
            let m = EvalArgs::need(a.m, "m", f)?;
            Box::new(move |u| Ok(vec![am(u, m)?]))
        }
        Sng | Cng | Dng | Fng | Mahler4 => {
            let p = a.mahler4(f)?;
            Box::new(move |v| {
                let w = mahler4_values(v, &p)?;
                Ok(match f {
                    Sng => vec![w.sng],
                    Cng => vec![w.cng],
                    Dng => vec![w.dng],
                    Fng => vec![w.fng],
                    _ => w.as_array().to_vec(),
                })
            })
        }
        Amg => {
            let p = a.mahler4(f)?;
            Box::new(move |v| Ok(vec![amg(v, &p)?]))
        }
        G => {
            let p = a.mahler4(f)?;
            Box::new(move |phi| Ok(vec![g_quadrature(phi, &p)?]))
        }
        Sng5 | Cng5 | Dng5 | Fng5 | Hng5 | Mahler5 => {
            let ev = Mahler5Eval::new(&a.mahler5(f)?, grid)?;
            Box::new(move |w| {
                let x = ev.values(w)?;
                Ok(match f {
                    Sng5 => vec![x.sng],
                    Cng5 => vec![x.cng],
                    Dng5 => vec![x.dng],
                    Fng5 => vec![x.fng],
                    Hng5 => vec![x.hng],
                    _ => x.as_array().to_vec(),
                })
            })
        }
        Amg5 => {
            let amp = nees_core::mahler5::Amg5::new(&a.mahler5(f)?)?;
            Box::new(move |w| Ok(vec![amp.eval(w)?]))
        }
        Pi => {
            let (n, m) = (EvalArgs::need(a.n, "n", f)?, EvalArgs::need(a.m, "m", f)?);
            Box::new(move |phi| Ok(vec![legendre_pi(phi, n, m)?]))
        }
        F => {
            let m = EvalArgs::need(a.m, "m", f)?;
            Box::new(move |phi| Ok(vec![legendre_f(phi, m)?]))
        }
        E => {
            let m = EvalArgs::need(a.m, "m", f)?;
            Box::new(move |phi| Ok(vec![legendre_e(phi, m)?]))
        }
        ThetaSimilar => {
            let k = EvalArgs::need(a.k, "k", f)?;
            theta_similar(0.0, k)?;
            Box::new(move |z| Ok(theta_similar(z, k)?.omega.to_vec()))
        }
        RbSolution => {
            let (_, k) = a.rigid_body(f)?;
            Box::new(move |t| {
                let s = rb_solution(t, &k)?;
                Ok(vec![s.sin_nu, s.cos_nu, s.nu, s.big_n])
            })
        }
        RbMu => {
            let (inertia, k) = a.rigid_body(f)?;
            Box::new(move |t| Ok(vec![rb_mu(t, &k, &inertia)?]))
        }
        K | RbPeriod => unreachable!("constants have no argument"),
    })
}

pub fn run(f: Function, args: &EvalArgs, out: &mut impl Write) -> anyhow::Result<()> {
    match f {
        Function::K => {
            writeln!(out, "{}", csv_row(&[complete_k(EvalArgs::need(args.m, "m", f)?)?]))?;
            return Ok(());
        }
        Function::RbPeriod => {
            let (_, k) = args.rigid_body(f)?;
            writeln!(out, "{}", csv_row(&[k.period()?]))?;
            return Ok(());
        }
        _ => {}
    }
    let grid = args.grid()?;
    let row = row_fn(f, args, &grid)?;
    for v in grid {
        let mut values = vec![v];
        values.extend(row(v)?);
        writeln!(out, "{}", csv_row(&values))?;
    }
    Ok(())
}
