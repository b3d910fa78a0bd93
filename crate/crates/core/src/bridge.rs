//! Brownian-bridge grids and the discounted premium integral
//! `η = ∫_0^θ c_u exp(h_θ − h_u) du` with `h_u = κu + σw_u`.

use rand::Rng;
use rand_distr::{Open01, StandardNormal};

use crate::model::ModelParams;
use crate::premium::PremiumSchedule;

pub const DEFAULT_BRIDGE_POINTS: usize = 64;

/// Brownian path on a uniform grid of `[0, θ]`, pinned at `w(0) = 0` and
/// `w(θ) = w_theta`.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeGrid {
    theta: f64,
    w: Vec<f64>,
}

impl BridgeGrid {
    /// Empty grid, to be filled by [`BridgeGrid::resample`].
    pub fn with_capacity(n_points: usize) -> Self {
        Self { theta: 0.0, w: Vec::with_capacity(n_points + 1) }
    }

    /// Number of sub-intervals.
    pub fn n_points(&self) -> usize {
        self.w.len().saturating_sub(1)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn step(&self) -> f64 {
        self.theta / self.n_points() as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_points() {
            self.theta
        } else {
            self.step() * k as f64
        }
    }

    pub fn w_values(&self) -> &[f64] {
        &self.w
    }

    pub fn w_theta(&self) -> f64 {
        *self.w.last().expect("bridge grid is never empty")
    }

    /// Refills the grid with a fresh bridge, drawing `n_points − 1` normals.
    ///
    /// Points are drawn left to right from the exact transition of the bridge
    /// given the previous point and the pinned endpoint.
    pub fn resample<R: Rng + ?Sized>(&mut self, rng: &mut R, theta: f64, w_theta: f64, n_points: usize) {
        assert!(theta > 0.0 && n_points >= 2, "bridge needs θ > 0 and at least two sub-intervals");
        self.theta = theta;
        self.w.clear();
        self.w.push(0.0);
        let dt = theta / n_points as f64;
        let mut prev = 0.0;
        for k in 1..n_points {
            let remaining = theta - dt * (k - 1) as f64;
            let frac = dt / remaining;
            let mean = prev + (w_theta - prev) * frac;
            let var = dt * (1.0 - frac);
            let z: f64 = rng.sample(StandardNormal);
            prev = mean + var.max(0.0).sqrt() * z;
            self.w.push(prev);
        }
        self.w.push(w_theta);
    }

    /// Grid with every sub-interval split in two, midpoints drawn from the
    /// bridge between their neighbours.
    pub fn refine<R: Rng + ?Sized>(&self, rng: &mut R) -> BridgeGrid {
        let half_var = self.step() / 4.0;
        let mut w = Vec::with_capacity(2 * self.w.len() - 1);
        for pair in self.w.windows(2) {
            w.push(pair[0]);
            let z: f64 = rng.sample(StandardNormal);
            w.push(0.5 * (pair[0] + pair[1]) + half_var.sqrt() * z);
        }
        w.push(self.w_theta());
        BridgeGrid { theta: self.theta, w }
    }

    /// Exact draw of `max_{0≤s≤θ} w(s)` for the continuous path given the grid.
    pub fn sample_path_max<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let h = self.step();
        self.w
            .windows(2)
            .map(|pair| {
                let (x, y) = (pair[0], pair[1]);
                let u: f64 = rng.sample(Open01);
                0.5 * (x + y + ((y - x) * (y - x) - 2.0 * h * u.ln()).sqrt())
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Fresh bridge on `n_points` uniform sub-intervals of `[0, θ]`.
pub fn sample_bridge<R: Rng + ?Sized>(rng: &mut R, theta: f64, w_theta: f64, n_points: usize) -> BridgeGrid {
    let mut grid = BridgeGrid::with_capacity(n_points);
    grid.resample(rng, theta, w_theta, n_points);
    grid
}

/// Trapezoidal estimate of the discounted premium collected over one
/// inter-claim block starting at absolute time `t_prev` with capital `x_prev`.
///
/// A state-dependent schedule sees the capital frozen at `x_prev` for the
/// whole block.
pub fn eta_integral(grid: &BridgeGrid, sched: &PremiumSchedule, params: &ModelParams, t_prev: f64, x_prev: f64) -> f64 {
    if sched.is_zero() {
        return 0.0;
    }
    let n = grid.n_points();
    let theta = grid.theta();
    let w_theta = grid.w_theta();
    let (kappa, sigma) = (params.kappa(), params.sigma());
    let f = |k: usize| {
        let u = grid.time(k);
        let growth = (kappa * (theta - u) + sigma * (w_theta - grid.w[k])).exp();
        sched.rate(t_prev + u, x_prev) * growth
    };
    let mut sum = 0.5 * (f(0) + f(n));
    for k in 1..n {
        sum += f(k);
    }
    (sum * grid.step()).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{ks_one_sample, MeanVar};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(a: f64, s2: f64) -> ModelParams {
        ModelParams::degenerate(a, s2, 1.0).unwrap()
    }

    #[test]
    fn endpoints_are_pinned() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = sample_bridge(&mut rng, 2.5, -0.7, 64);
        assert_eq!(g.n_points(), 64);
        assert_eq!(g.w_values()[0], 0.0);
        assert_eq!(g.w_theta(), -0.7);
        assert_eq!(g.time(64), 2.5);
    }

    #[test]
    fn midpoint_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (theta, w_theta) = (2.0, 1.2);
        let mids: Vec<f64> = (0..100_000).map(|_| sample_bridge(&mut rng, theta, w_theta, 2).w_values()[1]).collect();
        let mv: MeanVar = mids.iter().copied().collect();
        assert!((mv.mean() - 0.6).abs() < 4.0 * mv.std_error());
        // Variance of the sample variance for a normal: 2σ⁴/(n−1).
        let target = theta / 4.0;
        let se_var = (2.0 * target * target / 99_999.0).sqrt();
        assert!((mv.variance() - target).abs() < 4.0 * se_var, "{}", mv.variance());
    }

    #[test]
    fn bridge_covariance_between_disjoint_increments() {
        // For a bridge on [0, 1] pinned at 0, increments over [0, 1/4] and
        // [1/2, 3/4] have covariance −(1/4)(1/4) = −1/16.
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut prod = MeanVar::new();
        for _ in 0..200_000 {
            let g = sample_bridge(&mut rng, 1.0, 0.0, 4);
            let w = g.w_values();
            prod.push((w[1] - w[0]) * (w[3] - w[2]));
        }
        assert!((prod.mean() + 1.0 / 16.0).abs() < 4.0 * prod.std_error(), "{}", prod.mean());
    }

    #[test]
    fn path_maximum_matches_reflection_law() {
        // Bridge from 0 to 0 on [0, 1]: P(max ≤ m) = 1 − exp(−2m²).
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let maxima: Vec<f64> = (0..100_000)
            .map(|_| sample_bridge(&mut rng, 1.0, 0.0, 64).sample_path_max(&mut rng))
            .collect();
        let ks = ks_one_sample(&maxima, |m| if m <= 0.0 { 0.0 } else { 1.0 - (-2.0 * m * m).exp() });
        assert!(ks.p_value > 0.01, "{ks:?}");
    }

    #[test]
    fn zero_schedule_integrates_to_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = sample_bridge(&mut rng, 1.0, 0.3, 16);
        assert_eq!(eta_integral(&g, &PremiumSchedule::Zero, &params(0.1, 0.1), 0.0, 1.0), 0.0);
    }

    #[test]
    fn constant_premium_without_growth_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = sample_bridge(&mut rng, 1.7, 0.0, 7);
        let eta = eta_integral(&g, &PremiumSchedule::constant(2.5).unwrap(), &params(0.0, 0.0), 3.0, 1.0);
        assert!((eta - 2.5 * 1.7).abs() < 1e-12);
    }

    #[test]
    fn deterministic_growth_converges_quadratically() {
        let kappa: f64 = 0.4;
        let theta = 1.3;
        let exact = ((kappa * theta).exp() - 1.0) / kappa;
        let sched = PremiumSchedule::constant(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let err = |n: usize, rng: &mut ChaCha8Rng| {
            let g = sample_bridge(rng, theta, 0.0, n);
            (eta_integral(&g, &sched, &params(kappa, 0.0), 0.0, 0.0) - exact).abs()
        };
        let (e16, e32) = (err(16, &mut rng), err(32, &mut rng));
        assert!(e16 < 2e-3 && (e16 / e32 - 4.0).abs() < 0.1, "{e16} {e32}");
    }

    #[test]
    fn richardson_refinement_on_random_paths() {
        // Shared coarse randomness: each path is refined twice. For a
        // Brownian integrand the trapezoid error is first order in the
        // mesh, so RMS differences halve per doubling.
        let p = params(0.1, 0.1);
        let sched = PremiumSchedule::constant(1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (mut d1, mut d2) = (0.0, 0.0);
        for _ in 0..1000 {
            let w: f64 = rng.sample(StandardNormal);
            let g16 = sample_bridge(&mut rng, 1.0, w, 16);
            let g32 = g16.refine(&mut rng);
            let g64 = g32.refine(&mut rng);
            let e = |g: &BridgeGrid| eta_integral(g, &sched, &p, 0.0, 0.0);
            d1 += (e(&g32) - e(&g16)).powi(2);
            d2 += (e(&g64) - e(&g32)).powi(2);
        }
        let ratio = (d1 / d2).sqrt();
        assert!((1.6..2.6).contains(&ratio), "ratio {ratio}");
        assert!((d2 / 1000.0).sqrt() < 5e-3);
    }

    #[test]
    fn eta_is_nonnegative_and_bounded() {
        let p = params(0.3, 0.2);
        let scheds = [
            PremiumSchedule::constant(1.5).unwrap(),
            PremiumSchedule::exponential(1.5, -0.3).unwrap(),
            PremiumSchedule::capped_state(1.5, 4.0).unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20_000 {
            let theta: f64 = rng.random_range(0.01..5.0);
            let w_theta = theta.sqrt() * rng.sample::<f64, _>(StandardNormal);
            let g = sample_bridge(&mut rng, theta, w_theta, 32);
            let max_growth = g
                .w_values()
                .iter()
                .enumerate()
                .map(|(k, w)| p.kappa() * (theta - g.time(k)) + p.sigma() * (w_theta - w))
                .fold(f64::NEG_INFINITY, f64::max);
            for s in &scheds {
                let eta = eta_integral(&g, s, &p, rng.random_range(0.0..10.0), rng.random_range(-1.0..10.0));
                assert!(eta >= 0.0);
                assert!(eta <= s.cap() * theta * max_growth.exp() * (1.0 + 1e-12));
            }
        }
    }
}
