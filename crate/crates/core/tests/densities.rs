use murmur_core::arith::{sieve, ArithTables};
use murmur_core::densities::{
    admissible_c, ils_density, nu_density, old_pairing, sinc, w_so_hat, w_so_hat_atoms, NuWindow, Parity,
};
use murmur_core::frame::Sign;
use murmur_core::special::{bump, indicator, WeightFunction};
use std::f64::consts::PI;
use std::sync::OnceLock;

fn tables() -> &'static ArithTables {
    static T: OnceLock<ArithTables> = OnceLock::new();
    T.get_or_init(|| sieve(20_000).unwrap())
}

fn squarefree_by_trial(n: u64) -> bool {
    (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d * d))
}

/// Composite Simpson on `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn admissible_c_matches_brute_force() {
    let weights = [
        bump(1.0, 2.0).unwrap(),
        indicator(0.3, 4.0).unwrap(),
        bump(0.01, 0.02).unwrap(),
    ];
    for phi in &weights {
        let (a, b) = phi.support();
        for j in 1..=400 {
            let y = 0.0173 * j as f64 * j as f64;
            let t = 16.0 * PI * PI * y;
            let brute: Vec<u64> = (1..=10_000u64)
                .filter(|&c| {
                    let v = t / (c * c) as f64;
                    a <= v && v <= b
                })
                .collect();
            assert_eq!(admissible_c(y, phi), brute, "y={y}");
        }
    }
}

#[test]
fn ils_density_support_and_sign() {
    let phi = bump(1.0, 2.0).unwrap();
    let edge = 1.0 / (16.0 * PI * PI);
    for j in 0..200 {
        let y = edge * j as f64 / 200.0;
        assert_eq!(ils_density(y, &phi, Sign::Plus, tables()).unwrap(), 0.0);
    }
    let peak = 1.5 * edge;
    let plus = ils_density(peak, &phi, Sign::Plus, tables()).unwrap();
    let minus = ils_density(peak, &phi, Sign::Minus, tables()).unwrap();
    assert!(plus > 0.0);
    assert_eq!(plus, -minus);
    // Only c = 1 contributes at the peak: 4π·Φ(1.5).
    assert!((plus - 4.0 * PI * phi.eval(1.5)).abs() < 1e-15);
}

fn window(lo: (u64, u64), hi: (u64, u64)) -> NuWindow {
    NuWindow::Rational { lo, hi }
}

#[test]
fn unit_denominator_atoms_sit_at_squarefree_squares() {
    let nu = nu_density(window((1, 2), (50, 1)), 500, 1.0, None, tables()).unwrap();
    let mut found: Vec<u64> = nu.atoms.iter().filter(|a| a.a == 1).map(|a| a.q * a.q).collect();
    found.sort_unstable();
    let brute: Vec<u64> = (1..=500u64)
        .filter(|&q| squarefree_by_trial(q) && 2 * q * q >= 1 && q * q <= 50)
        .map(|q| q * q)
        .collect();
    assert_eq!(found, brute);
    assert_eq!(found, vec![1, 4, 9, 25, 36, 49]);
    for atom in &nu.atoms {
        assert!(squarefree_by_trial(atom.q));
        assert!((atom.location - (atom.q as f64 / atom.a as f64).powi(2)).abs() < 1e-12);
    }
}

#[test]
fn endpoint_atom_is_halved() {
    let at = |nu: &murmur_core::densities::NuDensity| nu.atoms.iter().find(|a| a.q == 2 && a.a == 1).copied().unwrap();
    let closed = nu_density(window((4, 1), (5, 1)), 500, 1.0, None, tables()).unwrap();
    let open = nu_density(window((39, 10), (5, 1)), 500, 1.0, None, tables()).unwrap();
    let (e, i) = (at(&closed), at(&open));
    assert!(e.endpoint && !i.endpoint);
    assert_eq!(e.mass * 2.0, i.mass);
    // μ(2)²/(φ(2)²σ(2))·2³ = 8/3
    assert!((i.mass - 8.0 / 3.0).abs() < 1e-14);

    let float = nu_density(
        NuWindow::Float {
            lo: 4.0 * (1.0 + 1e-13),
            hi: 5.0,
        },
        500,
        1.0,
        None,
        tables(),
    )
    .unwrap();
    assert!(at(&float).endpoint);
}

#[test]
fn tail_bound_covers_q_doubling() {
    for (lo, hi) in [((1, 2), (50, 1)), ((4, 1), (5, 1)), ((1, 10), (2, 1))] {
        for q in [20u64, 50, 100, 200, 500, 1000] {
            let a = nu_density(window(lo, hi), q, 1.0, None, tables()).unwrap();
            let b = nu_density(window(lo, hi), 2 * q, 1.0, None, tables()).unwrap();
            let ma: f64 = a.atoms.iter().map(|x| x.mass).sum();
            let mb: f64 = b.atoms.iter().map(|x| x.mass).sum();
            assert!(
                mb - ma >= 0.0 && mb - ma <= a.tail_bound,
                "Q={q}: {} vs {}",
                mb - ma,
                a.tail_bound
            );
            assert!(b.tail_bound < a.tail_bound);
        }
    }
}

#[test]
fn sinc_transform_matches_the_half_indicator() {
    let t = 200.0;
    for j in 0..=60 {
        let y = -3.0 + 0.1 * j as f64 + 0.0137;
        if ((y.abs()) - 1.0).abs() <= 0.1 {
            continue;
        }
        // sinc is even, so the transform is a cosine integral.
        let ft = 2.0 * simpson(|x| sinc(x) * (2.0 * PI * x * y).cos(), 0.0, t, 400_000);
        let target = if y.abs() <= 1.0 { 0.5 } else { 0.0 };
        assert!((ft - target).abs() <= 2e-2, "y={y}: {ft}");
        // The continuous part of the transformed odd kernel is this transform.
        assert_eq!(w_so_hat(Parity::Odd, y), target);
    }
}

#[test]
fn continuous_parts_sum_to_one() {
    for j in 0..=1000 {
        let y = -5.0 + 0.01 * j as f64;
        assert_eq!(w_so_hat(Parity::Even, y) + w_so_hat(Parity::Odd, y), 1.0, "y={y}");
    }
    assert_eq!(w_so_hat_atoms(Parity::Even), w_so_hat_atoms(Parity::Odd));
}

#[test]
fn pairing_closed_forms() {
    for theta in [0.2, 0.5, 0.99] {
        let phi = WeightFunction::symmetric_bump(theta).unwrap();
        let mass = simpson(|y| phi.eval(y), -theta, theta, 20_000);
        let closed = phi.eval(0.0) + 0.5 * mass;
        for parity in [Parity::Even, Parity::Odd] {
            let got = old_pairing(&phi, parity).unwrap();
            assert!((got - closed).abs() <= 1e-6, "θ={theta}: {got} vs {closed}");
        }
    }
    // Beyond ±1 the kernels separate by the mass outside [−1, 1].
    let phi = WeightFunction::symmetric_bump(1.6).unwrap();
    let inner = simpson(|y| phi.eval(y), -1.0, 1.0, 20_000);
    let outer = 2.0 * simpson(|y| phi.eval(y), 1.0, 1.6, 20_000);
    let odd = old_pairing(&phi, Parity::Odd).unwrap();
    let even = old_pairing(&phi, Parity::Even).unwrap();
    assert!((odd - (phi.eval(0.0) + 0.5 * inner)).abs() <= 1e-6);
    assert!((even - (phi.eval(0.0) + 0.5 * inner + outer)).abs() <= 1e-6);
    assert!(old_pairing(&WeightFunction::symmetric_bump(2.0).unwrap(), Parity::Odd).is_err());
}
