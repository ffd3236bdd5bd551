//! 256-bit reference evaluation of every closed-form bound and rate,
//! written directly from the textbook expressions.

use astro_float::{BigFloat, Consts, RoundingMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use relay_scaling::bounds::full_cooperation_capacity;
use relay_scaling::scaling::interference_info_lower_bound;
use relay_scaling::*;

const PREC: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;
pub const POINTS: usize = 1000;
pub const REL_TOL: f64 = 1e-12;

struct Hp {
    cc: Consts,
}

impl Hp {
    fn new() -> Self {
        Hp {
            cc: Consts::new().expect("constants cache"),
        }
    }

    fn log2(&mut self, a: &BigFloat) -> BigFloat {
        a.log2(PREC, RM, &mut self.cc)
    }

    fn half_log2(&mut self, a: &BigFloat) -> BigFloat {
        div(&self.log2(a), &n(2.0))
    }

    /// `2^(2c)`
    fn exp4(&mut self, c: f64) -> BigFloat {
        n(2.0).pow(&n(2.0 * c), PREC, RM, &mut self.cc)
    }

    fn pi(&mut self) -> BigFloat {
        self.cc.pi(PREC, RM)
    }

    fn e(&mut self) -> BigFloat {
        self.cc.e(PREC, RM)
    }
}

fn n(x: f64) -> BigFloat {
    BigFloat::from_f64(x, PREC)
}

fn add(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.add(b, PREC, RM)
}

fn sub(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.sub(b, PREC, RM)
}

fn mul(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.mul(b, PREC, RM)
}

fn div(a: &BigFloat, b: &BigFloat) -> BigFloat {
    a.div(b, PREC, RM)
}

fn min(a: &BigFloat, b: &BigFloat) -> BigFloat {
    if a.cmp(b).expect("finite") <= 0 {
        a.clone()
    } else {
        b.clone()
    }
}

fn f(a: &BigFloat) -> f64 {
    format!("{a}").parse().expect("decimal rendering parses")
}

fn clamp0(a: &BigFloat) -> f64 {
    f(a).max(0.0)
}

#[derive(Clone, Copy, Debug)]
pub struct Point {
    pub p_x: f64,
    pub p_j: f64,
    pub c1: f64,
    pub c2: f64,
}

fn grid() -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f1de);
    let mut log_uniform = |lo: f64, hi: f64| 10f64.powf(rng.random_range(lo..hi));
    (0..POINTS)
        .map(|_| Point {
            p_x: log_uniform(-2.0, 9.0),
            p_j: log_uniform(-2.0, 9.0),
            c1: log_uniform(-3.0, 1.5),
            c2: log_uniform(-3.0, 1.5),
        })
        .collect()
}

/// `½·log2(1 + P/(P_J + 1))`
fn hp_interfered(h: &mut Hp, p: f64, pj: f64) -> BigFloat {
    let ratio = div(&n(p), &add(&n(pj), &n(1.0)));
    let arg = add(&n(1.0), &ratio);
    h.half_log2(&arg)
}

fn hp_half_log2_1p(h: &mut Hp, x: &BigFloat) -> BigFloat {
    let arg = add(&n(1.0), x);
    h.half_log2(&arg)
}

/// `½·log2((1+P)(2^(2C1)-1) / (P + 2^(2C1) + min{1+P, P_J·P/(P+1)}·2^(-2C2)·(2^(2C1)-1)))`,
/// with an unlimited first link giving `½·log2((1+P)/(1 + min{…}·2^(-2C2)))`.
fn hp_lattice_rate(h: &mut Hp, p: f64, pj: f64, c1: Option<f64>, c2: f64) -> f64 {
    let one = n(1.0);
    let bp = n(p);
    let p1 = add(&bp, &one);
    let pjp = div(&mul(&n(pj), &bp), &p1);
    let m = min(&p1, &pjp);
    let e2 = h.exp4(c2);
    let shrink = div(&m, &e2);
    let ratio = match c1 {
        None => div(&p1, &add(&one, &shrink)),
        Some(c1) => {
            let e1 = h.exp4(c1);
            let e1m = sub(&e1, &one);
            let num = mul(&p1, &e1m);
            let den = add(&add(&bp, &e1), &mul(&shrink, &e1m));
            div(&num, &den)
        }
    };
    let r = h.half_log2(&ratio);
    clamp0(&r)
}

/// Anti-phase scheme with `α = 2P/(4P+2)`:
/// `½·log2(P / (½ + P/(2^(2C1)-1) + min{P, 4P_J + 2 + P/(2^(2C1)-1)}/(2^(2C2)-1)))`.
fn hp_derived_oriented(h: &mut Hp, p: f64, pj: f64, c1: f64, c2: f64) -> f64 {
    let one = n(1.0);
    let bp = n(p);
    let e1m = sub(&h.exp4(c1), &one);
    let e2m = sub(&h.exp4(c2), &one);
    let d1 = div(&bp, &e1m);
    let load = add(&add(&mul(&n(4.0), &n(pj)), &n(2.0)), &d1);
    let d2 = div(&min(&bp, &load), &e2m);
    let neq = add(&add(&n(0.5), &d1), &d2);
    let r = h.half_log2(&div(&bp, &neq));
    clamp0(&r)
}

fn rel_err(got: f64, want: f64) -> f64 {
    if got == want {
        0.0
    } else {
        (got - want).abs() / want.abs()
    }
}

/// Worst relative error seen per operation.
pub struct Tally {
    pub worst: Vec<(String, f64, Point)>,
}

impl Tally {
    fn check(&mut self, name: &str, got: f64, want: f64, pt: Point) {
        let e = rel_err(got, want);
        match self.worst.iter_mut().find(|w| w.0 == name) {
            Some(w) if e > w.1 => *w = (name.to_string(), e, pt),
            Some(_) => {}
            None => self.worst.push((name.to_string(), e, pt)),
        }
    }
}

/// Evaluates every operation on the random log-grid against the oracle.
pub fn run_oracle() -> Tally {
    let mut h = Hp::new();
    let mut t = Tally { worst: Vec::new() };
    let fin = Capacity::Finite;

    let (pi, e) = (h.pi(), h.e());
    let eight_pi_e = mul(&n(8.0), &mul(&pi, &e));
    let l = h.log2(&eight_pi_e);
    let modulo_const = div(&l, &n(4.0));

    for pt in grid() {
        let Point { p_x, p_j, c1, c2 } = pt;
        let cfg_a = make_preset(ScenarioCase::CaseA, p_x, p_j, None, Some(fin(c2))).unwrap();
        let cfg_b = make_preset(ScenarioCase::CaseB, p_x, p_j, Some(fin(c1)), Some(fin(c2))).unwrap();
        let cfg_c = make_preset(ScenarioCase::CaseC, p_x, p_j, Some(fin(c1)), Some(fin(c2))).unwrap();

        let single = hp_interfered(&mut h, p_x, p_j);
        let cond = hp_half_log2_1p(&mut h, &n(p_x));
        let two_p = mul(&n(2.0), &n(p_x));
        let coop = hp_half_log2_1p(&mut h, &two_p);
        let (bc1, bc2) = (n(c1), n(c2));

        let want_a = min(&add(&bc2, &single), &cond);
        t.check("cutset A", cutset_case_a(&cfg_a).unwrap().cutset_min, f(&want_a), pt);

        let want_b = min(&bc1, &want_a);
        t.check("cutset B", cutset_case_b(&cfg_b).unwrap().cutset_min, f(&want_b), pt);

        let want_c = [add(&bc1, &single), add(&bc2, &single), coop.clone()]
            .iter()
            .fold(add(&bc1, &bc2), |acc, x| min(&acc, x));
        t.check("cutset C", cutset_case_c(&cfg_c).unwrap().cutset_min, f(&want_c), pt);

        let sep = {
            let ratio = div(&n(p_x), &n(p_j));
            hp_half_log2_1p(&mut h, &ratio)
        };
        let want_mod = add(&div(&add(&add(&bc1, &bc2), &sep), &n(2.0)), &modulo_const);
        t.check("modulo C", modulo_bound_case_c(&cfg_c).unwrap(), f(&want_mod), pt);

        t.check("full cooperation", full_cooperation_capacity(p_x), f(&coop), pt);

        let r_a = hp_lattice_rate(&mut h, p_x, p_j, None, c2);
        t.check("achievable A", achievable_case_a(p_x, p_j, fin(c2)).unwrap().rate, r_a, pt);

        let r_b = hp_lattice_rate(&mut h, p_x, p_j, Some(c1), c2);
        t.check("achievable B", achievable_case_b(p_x, p_j, fin(c1), fin(c2)).unwrap().rate, r_b, pt);

        let r_c = r_b.max(hp_lattice_rate(&mut h, p_x, p_j, Some(c2), c1));
        let got = achievable_case_c(p_x, p_j, fin(c1), fin(c2), CaseCVariant::ClosedForm).unwrap().rate;
        t.check("achievable C", got, r_c, pt);

        let r_d = hp_derived_oriented(&mut h, p_x, p_j, c1, c2).max(hp_derived_oriented(&mut h, p_x, p_j, c2, c1));
        let got = achievable_case_c(p_x, p_j, fin(c1), fin(c2), CaseCVariant::Derived).unwrap().rate;
        t.check("achievable C derived", got, r_d, pt);

        let single_f = f(&single);
        let got = local_decode_baseline(ScenarioCase::CaseB, p_x, p_j, fin(c1), fin(c2)).unwrap().rate;
        t.check("local decode B", got, c1.min(single_f), pt);
        let sum = f(&add(&bc1, &bc2));
        let got = local_decode_baseline(ScenarioCase::CaseC, p_x, p_j, fin(c1), fin(c2)).unwrap().rate;
        t.check("local decode C", got, sum.min(single_f), pt);

        let info = {
            let prod = mul(&n(p_x), &n(p_j));
            let harm = div(&prod, &add(&n(p_x), &n(p_j)));
            h.half_log2(&harm)
        };
        t.check("interference information", interference_info_lower_bound(p_x, p_j).unwrap(), f(&info), pt);
    }

    t
}
