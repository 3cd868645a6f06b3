//! Stiff benchmark problems with analytic Jacobians and their tolerance
//! protocols.
//!
//! Every definition is generic over [`Real`]; constants are parsed from
//! their decimal literals at the requested precision so that extended
//! precision runs see the exact decimal values.

use std::collections::BTreeMap;

use crate::error::ProblemError;
use crate::linalg::Matrix;
use crate::real::Real;
use crate::solver::OdeProblem;

pub const PROBLEM_NAMES: [&str; 4] = ["oregonator", "robertson", "hires", "pollution"];

/// Tolerance sweep of a benchmark: `rtol = 10^e` for `e` from `rtol_exp_hi`
/// down to `rtol_exp_lo`, `atol = 10^(e + atol_offset)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Protocol {
    pub rtol_exp_hi: i32,
    pub rtol_exp_lo: i32,
    pub atol_offset: i32,
    pub ref_tol: f64,
}

impl Protocol {
    pub fn rtol_exponents(&self) -> Vec<i32> {
        (self.rtol_exp_lo..=self.rtol_exp_hi).rev().collect()
    }
}

#[derive(Clone, Debug)]
pub struct NamedProblem<T> {
    pub name: &'static str,
    pub problem: OdeProblem<T>,
    pub protocol: Protocol,
}

fn lit<T: Real>(s: &str, prec: u32) -> T {
    T::parse(s, prec).unwrap_or_else(|| panic!("bad literal {s}"))
}

fn lits<T: Real>(xs: &[&str], prec: u32) -> Vec<T> {
    xs.iter().map(|s| lit(s, prec)).collect()
}

/// Belousov-Zhabotinsky reaction, three species.
///
/// `y1' = k1 (y2 + y1 (1 - k2 y1 - y2))`, `y2' = (y3 - (1 + y1) y2) / k1`,
/// `y3' = k3 (y1 - y3)`. A leading minus on `y1'`, seen in some
/// transcriptions, makes the solution blow up in finite time; the sign here
/// is the one of the original model.
pub fn oregonator<T: Real>(prec: u32) -> NamedProblem<T> {
    let k: Vec<T> = lits(&["77.27", "8.375e-3", "0.161"], prec);
    let one = T::one(prec);
    let (k1, k2, k3) = (k[0].clone(), k[1].clone(), k[2].clone());
    let (j1, j2, j3) = (k1.clone(), k2.clone(), k3.clone());
    let jone = one.clone();
    let rhs = move |_t: &T, y: &[T], out: &mut [T]| {
        let inner = one.clone() - &(k2.clone() * &y[0]) - &y[1];
        out[0] = k1.clone() * &(y[1].clone() + &(y[0].clone() * &inner));
        out[1] = (y[2].clone() - &((one.clone() + &y[0]) * &y[1])) / &k1;
        out[2] = k3.clone() * &(y[0].clone() - &y[2]);
    };
    let jac = move |_t: &T, y: &[T], j: &mut Matrix<T>| {
        let two = jone.clone() + &jone;
        j[(0, 0)] = j1.clone() * &(jone.clone() - &(two * &j2 * &y[0]) - &y[1]);
        j[(0, 1)] = j1.clone() * &(jone.clone() - &y[0]);
        j[(0, 2)] = T::zero(prec);
        j[(1, 0)] = -(y[1].clone() / &j1);
        j[(1, 1)] = -((jone.clone() + &y[0]) / &j1);
        j[(1, 2)] = jone.clone() / &j1;
        j[(2, 0)] = j3.clone();
        j[(2, 1)] = T::zero(prec);
        j[(2, 2)] = -j3.clone();
    };
    NamedProblem {
        name: "oregonator",
        problem: OdeProblem::new(rhs, lits(&["1", "2", "3"], prec), T::zero(prec), lit("30", prec))
            .with_jacobian(jac),
        protocol: Protocol { rtol_exp_hi: -5, rtol_exp_lo: -12, atol_offset: -2, ref_tol: 1e-14 },
    }
}

/// Robertson's autocatalytic kinetics.
///
/// `y1' = -k1 y1 + k3 y2 y3`, `y2' = k1 y1 - k2 y2² - k3 y2 y3`,
/// `y3' = k2 y2²`. Some transcriptions write `k2` in the `y2 y3` loss term
/// of `y2'`; `k3` keeps the total mass constant.
pub fn robertson<T: Real>(prec: u32) -> NamedProblem<T> {
    let k: Vec<T> = lits(&["0.04", "3e7", "1e4"], prec);
    let kj = k.clone();
    let rhs = move |_t: &T, y: &[T], out: &mut [T]| {
        let r1 = k[0].clone() * &y[0];
        let r2 = k[1].clone() * &y[1] * &y[1];
        let r3 = k[2].clone() * &y[1] * &y[2];
        out[0] = r3.clone() - &r1;
        out[1] = r1 - &r2 - &r3;
        out[2] = r2;
    };
    let jac = move |_t: &T, y: &[T], j: &mut Matrix<T>| {
        let k = &kj;
        let two = T::from_i64(2, prec);
        j[(0, 0)] = -k[0].clone();
        j[(0, 1)] = k[2].clone() * &y[2];
        j[(0, 2)] = k[2].clone() * &y[1];
        j[(1, 0)] = k[0].clone();
        j[(1, 1)] = -(two.clone() * &k[1] * &y[1]) - &(k[2].clone() * &y[2]);
        j[(1, 2)] = -(k[2].clone() * &y[1]);
        j[(2, 0)] = T::zero(prec);
        j[(2, 1)] = two * &k[1] * &y[1];
        j[(2, 2)] = T::zero(prec);
    };
    NamedProblem {
        name: "robertson",
        problem: OdeProblem::new(rhs, lits(&["1", "0", "0"], prec), T::zero(prec), lit("1e5", prec))
            .with_jacobian(jac),
        protocol: Protocol { rtol_exp_hi: -4, rtol_exp_lo: -8, atol_offset: -5, ref_tol: 1e-14 },
    }
}

/// Plant physiology model, eight species.
pub fn hires<T: Real>(prec: u32) -> NamedProblem<T> {
    let c: Vec<T> = lits(
        &["1.71", "0.43", "8.32", "0.0007", "8.75", "10.03", "0.35", "1.12", "1.745", "280", "0.69", "1.81"],
        prec,
    );
    let cj = c.clone();
    let rhs = move |_t: &T, y: &[T], out: &mut [T]| {
        let [k171, k043, k832, k0007, k875, k1003, k035, k112, k1745, k280, k069, k181] =
            std::array::from_fn(|i| &c[i]);
        let p = |a: &T, b: &T| a.clone() * b;
        let r68 = k280.clone() * &y[5] * &y[7];
        out[0] = -p(k171, &y[0]) + &p(k043, &y[1]) + &p(k832, &y[2]) + k0007;
        out[1] = p(k171, &y[0]) - &p(k875, &y[1]);
        out[2] = -p(k1003, &y[2]) + &p(k043, &y[3]) + &p(k035, &y[4]);
        out[3] = p(k832, &y[1]) + &p(k171, &y[2]) - &p(k112, &y[3]);
        out[4] = -p(k1745, &y[4]) + &p(k043, &y[5]) + &p(k043, &y[6]);
        out[5] = -r68.clone() + &p(k069, &y[3]) + &p(k171, &y[4]) - &p(k043, &y[5]) + &p(k069, &y[6]);
        out[6] = r68.clone() - &p(k181, &y[6]);
        out[7] = -r68 + &p(k181, &y[6]);
    };
    let jac = move |_t: &T, y: &[T], j: &mut Matrix<T>| {
        let c = &cj;
        for x in 0..8 {
            for z in 0..8 {
                j[(x, z)] = T::zero(prec);
            }
        }
        let (k171, k043, k832, k875, k1003, k035, k112, k1745, k280, k069, k181) = (
            &c[0], &c[1], &c[2], &c[4], &c[5], &c[6], &c[7], &c[8], &c[9], &c[10], &c[11],
        );
        j[(0, 0)] = -k171.clone();
        j[(0, 1)] = k043.clone();
        j[(0, 2)] = k832.clone();
        j[(1, 0)] = k171.clone();
        j[(1, 1)] = -k875.clone();
        j[(2, 2)] = -k1003.clone();
        j[(2, 3)] = k043.clone();
        j[(2, 4)] = k035.clone();
        j[(3, 1)] = k832.clone();
        j[(3, 2)] = k171.clone();
        j[(3, 3)] = -k112.clone();
        j[(4, 4)] = -k1745.clone();
        j[(4, 5)] = k043.clone();
        j[(4, 6)] = k043.clone();
        let d6 = k280.clone() * &y[7];
        let d8 = k280.clone() * &y[5];
        j[(5, 3)] = k069.clone();
        j[(5, 4)] = k171.clone();
        j[(5, 5)] = -d6.clone() - k043;
        j[(5, 6)] = k069.clone();
        j[(5, 7)] = -d8.clone();
        j[(6, 5)] = d6.clone();
        j[(6, 6)] = -k181.clone();
        j[(6, 7)] = d8.clone();
        j[(7, 5)] = -d6;
        j[(7, 6)] = k181.clone();
        j[(7, 7)] = -d8;
    };
    NamedProblem {
        name: "hires",
        problem: OdeProblem::new(
            rhs,
            lits(&["1", "0", "0", "0", "0", "0", "0", "0.0057"], prec),
            T::zero(prec),
            lit("321.8122", prec),
        )
        .with_jacobian(jac),
        protocol: Protocol { rtol_exp_hi: -5, rtol_exp_lo: -10, atol_offset: -2, ref_tol: 1e-14 },
    }
}

/// A mass-action reaction: rate `k[rate] · Π y[reactants]` feeding the
/// species changes in `effects`.
struct Reaction {
    rate: usize,
    reactants: &'static [usize],
    effects: &'static [(usize, i64)],
}

// Species and constants are zero-based: y1 is index 0, k1 is index 0.
// Garbled terms found in some transcriptions are read as in the original model:
// "-k10 y11 k1" in y1' is -k10 y11 y1, the stray "-k" in y8' is dropped,
// and the "-k10 y11" loss in y11' is -k10 y11 y1.
const POLLUTION_REACTIONS: [Reaction; 25] = [
    Reaction { rate: 0, reactants: &[0], effects: &[(0, -1), (1, 1), (2, 1)] },
    Reaction { rate: 1, reactants: &[1, 3], effects: &[(1, -1), (3, -1), (0, 1)] },
    Reaction { rate: 2, reactants: &[4, 1], effects: &[(4, -1), (1, -1), (0, 1), (5, 1)] },
    Reaction { rate: 3, reactants: &[6], effects: &[(6, -1), (4, 2), (7, 1)] },
    Reaction { rate: 4, reactants: &[6], effects: &[(6, -1), (7, 1)] },
    Reaction { rate: 5, reactants: &[6, 5], effects: &[(6, -1), (5, -1), (4, 1), (7, 1)] },
    Reaction { rate: 6, reactants: &[8], effects: &[(8, -1), (4, 1), (7, 1), (9, 1)] },
    Reaction { rate: 7, reactants: &[8, 5], effects: &[(8, -1), (5, -1), (10, 1)] },
    Reaction { rate: 8, reactants: &[10, 1], effects: &[(10, -1), (1, -1), (0, 1), (9, 1), (11, 1)] },
    Reaction { rate: 9, reactants: &[10, 0], effects: &[(10, -1), (0, -1), (12, 1)] },
    Reaction { rate: 10, reactants: &[12], effects: &[(12, -1), (0, 1), (10, 1)] },
    Reaction { rate: 11, reactants: &[9, 1], effects: &[(9, -1), (1, -1), (0, 1), (13, 1)] },
    Reaction { rate: 12, reactants: &[13], effects: &[(13, -1), (4, 1), (6, 1)] },
    Reaction { rate: 13, reactants: &[0, 5], effects: &[(0, -1), (5, -1), (14, 1)] },
    Reaction { rate: 14, reactants: &[2], effects: &[(2, -1), (3, 1)] },
    Reaction { rate: 15, reactants: &[3], effects: &[(3, -1), (15, 1)] },
    Reaction { rate: 16, reactants: &[3], effects: &[(3, -1), (2, 1)] },
    Reaction { rate: 17, reactants: &[15], effects: &[(15, -1), (5, 2)] },
    Reaction { rate: 18, reactants: &[15], effects: &[(15, -1), (2, 1)] },
    Reaction { rate: 19, reactants: &[16, 5], effects: &[(16, -1), (5, -1), (4, 1), (17, 1)] },
    Reaction { rate: 20, reactants: &[18], effects: &[(18, -1), (1, 1)] },
    Reaction { rate: 21, reactants: &[18], effects: &[(18, -1), (0, 1), (2, 1)] },
    Reaction { rate: 22, reactants: &[0, 3], effects: &[(0, -1), (3, -1), (18, 1)] },
    Reaction { rate: 23, reactants: &[18, 0], effects: &[(18, -1), (0, -1), (19, 1)] },
    Reaction { rate: 24, reactants: &[19], effects: &[(19, -1), (0, 1), (18, 1)] },
];

pub const POLLUTION_RATES: [&str; 25] = [
    "0.25", "26.6", "12300", "0.00086", "0.00082", "15000", "0.00013", "24000", "16500", "9000",
    "0.022", "12000", "1.88", "16300", "4.8e6", "0.00035", "0.0175", "1e8", "4.44e11", "1240",
    "2.1", "5.78", "0.0474", "1780", "3.12",
];

fn add_scaled<T: Real>(acc: &mut T, coeff: i64, x: &T) {
    match coeff {
        1 => *acc += x,
        -1 => *acc -= x,
        _ => *acc += &(T::from_i64(coeff, x.precision()) * x),
    }
}

/// Atmospheric chemistry model, 20 species and 25 reactions.
pub fn pollution<T: Real>(prec: u32) -> NamedProblem<T> {
    let k: Vec<T> = lits(&POLLUTION_RATES, prec);
    let kj = k.clone();
    let rhs = move |_t: &T, y: &[T], out: &mut [T]| {
        for o in out.iter_mut() {
            *o = T::zero(prec);
        }
        for r in &POLLUTION_REACTIONS {
            let rate = r.reactants.iter().fold(k[r.rate].clone(), |acc, &i| acc * &y[i]);
            for &(i, c) in r.effects {
                add_scaled(&mut out[i], c, &rate);
            }
        }
    };
    let jac = move |_t: &T, y: &[T], j: &mut Matrix<T>| {
        for a in 0..20 {
            for b in 0..20 {
                j[(a, b)] = T::zero(prec);
            }
        }
        for r in &POLLUTION_REACTIONS {
            for (m, &wrt) in r.reactants.iter().enumerate() {
                let d = r
                    .reactants
                    .iter()
                    .enumerate()
                    .filter(|&(q, _)| q != m)
                    .fold(kj[r.rate].clone(), |acc, (_, &i)| acc * &y[i]);
                for &(i, c) in r.effects {
                    let mut e = j[(i, wrt)].clone();
                    add_scaled(&mut e, c, &d);
                    j[(i, wrt)] = e;
                }
            }
        }
    };
    let mut y0 = vec![T::zero(prec); 20];
    for (i, v) in [(1, "0.2"), (3, "0.04"), (6, "0.1"), (7, "0.3"), (8, "0.017"), (16, "0.007")] {
        y0[i] = lit(v, prec);
    }
    NamedProblem {
        name: "pollution",
        problem: OdeProblem::new(rhs, y0, T::zero(prec), lit("60", prec)).with_jacobian(jac),
        protocol: Protocol { rtol_exp_hi: -4, rtol_exp_lo: -9, atol_offset: -4, ref_tol: 1e-14 },
    }
}

pub fn get_problem<T: Real>(name: &str, prec: u32) -> Result<NamedProblem<T>, ProblemError> {
    match name.to_ascii_lowercase().as_str() {
        "oregonator" => Ok(oregonator(prec)),
        "robertson" => Ok(robertson(prec)),
        "hires" => Ok(hires(prec)),
        "pollution" => Ok(pollution(prec)),
        _ => Err(ProblemError::UnknownProblem(name.to_string())),
    }
}

pub fn problem_registry<T: Real>(prec: u32) -> BTreeMap<&'static str, NamedProblem<T>> {
    PROBLEM_NAMES
        .iter()
        .map(|&n| (n, get_problem(n, prec).expect("registered name")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f0(p: &NamedProblem<f64>) -> Vec<f64> {
        p.problem.eval(&p.problem.t0, &p.problem.y0)
    }

    #[test]
    fn oregonator_initial_slope() {
        let f = f0(&oregonator(53));
        assert!((f[0] - 76.62286375).abs() < 1e-8, "{}", f[0]);
        assert!((f[1] + 0.012941633234).abs() < 1e-11, "{}", f[1]);
        assert!((f[2] + 0.322).abs() < 1e-15);
    }

    #[test]
    fn robertson_initial_slope() {
        assert_eq!(f0(&robertson(53)), vec![-0.04, 0.04, 0.0]);
    }

    #[test]
    fn hires_initial_slope() {
        let f = f0(&hires(53));
        assert!((f[0] + 1.7093).abs() < 1e-14);
        assert!((f[1] - 1.71).abs() < 1e-14);
    }

    #[test]
    fn pollution_constants_and_zero_species() {
        let p = pollution::<f64>(53);
        assert_eq!(POLLUTION_RATES.len(), 25);
        assert_eq!(POLLUTION_RATES[0], "0.25");
        assert_eq!(POLLUTION_RATES[24], "3.12");
        let f = f0(&p);
        assert_eq!(f[11], 0.0);
        assert_eq!(f[14], 0.0);
        assert!(f.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn registry_lookup() {
        assert_eq!(get_problem::<f64>("robertson", 53).unwrap().name, "robertson");
        assert_eq!(get_problem::<f64>("hires", 53).unwrap().problem.dim(), 8);
        assert_eq!(
            get_problem::<f64>("lorenz", 53).unwrap_err(),
            ProblemError::UnknownProblem("lorenz".into())
        );
        assert_eq!(problem_registry::<f64>(53).len(), 4);
    }

    #[test]
    fn protocols_match_sweep_sizes() {
        assert_eq!(hires::<f64>(53).protocol.rtol_exponents(), vec![-5, -6, -7, -8, -9, -10]);
        assert_eq!(robertson::<f64>(53).protocol.rtol_exponents().len(), 5);
        assert_eq!(oregonator::<f64>(53).protocol.rtol_exponents().len(), 8);
        assert_eq!(pollution::<f64>(53).protocol.rtol_exponents().len(), 6);
    }
}
