//! Run-level properties of the modulated dynamics: the modulation
//! parameters move at the rate set by the local size of the perturbation,
//! a run at c = 0.5 reproduces the boosted rest-frame solution, and the 𝓛
//! profiles of the two runs are compared at matched proper times.

use kinklab_core::{Boundary, FieldState, Perturbation, RunConfig, Simulation, TrackSample};

fn phi6_config(delta: f64, c0: f64, half_width: f64, t_end: f64, boundary: Boundary) -> RunConfig {
    let mut cfg = RunConfig {
        perturbation: if delta == 0.0 {
            Perturbation::None
        } else {
            Perturbation::Gaussian {
                amplitude: delta,
                width: 2.0,
                center: 0.0,
                component: 1,
            }
        },
        ..RunConfig::default()
    };
    cfg.model.pair = Some((0.0, 1.0));
    cfg.model.c0 = c0;
    cfg.grid.half_width = Some(half_width);
    cfg.grid.t_end = t_end;
    cfg.grid.sample_every = 5;
    cfg.grid.boundary = boundary;
    cfg
}

/// Largest `max(|ẏ − c|, |ċ|) / 𝓛` over interior samples, with centred
/// differences in time, and the largest rate itself.
fn rate_constant(samples: &[TrackSample]) -> (f64, f64) {
    let mut worst_ratio: f64 = 0.0;
    let mut worst_rate: f64 = 0.0;
    for w in samples.windows(3) {
        let h = w[2].t - w[0].t;
        let ydot = (w[2].y - w[0].y) / h;
        let cdot = (w[2].c - w[0].c) / h;
        let rate = (ydot - w[1].c).abs().max(cdot.abs());
        worst_rate = worst_rate.max(rate);
        worst_ratio = worst_ratio.max(rate / w[1].lfun);
    }
    (worst_ratio, worst_rate)
}

#[test]
fn modulation_rates_are_bounded_by_the_local_perturbation() {
    let runs: Vec<(f64, f64)> = [0.02, 0.01]
        .into_iter()
        .map(|delta| {
            let cfg = phi6_config(delta, 0.0, 40.0 / 2f64.sqrt(), 60.0, Boundary::Sponge);
            let out = kinklab_core::run(&cfg).unwrap();
            rate_constant(&out.track.samples)
        })
        .collect();
    let (c_big, rate_big) = runs[0];
    let (c_small, rate_small) = runs[1];
    assert!(c_big.is_finite() && c_small.is_finite());
    // the same constant serves both amplitudes
    let spread = c_big.max(c_small) / c_big.min(c_small);
    assert!(
        spread < 2.0,
        "C = {c_big:.3e} at 0.02, {c_small:.3e} at 0.01"
    );
    // and the rates themselves are quadratic in the amplitude
    let ratio = rate_big / rate_small;
    assert!((3.0..5.0).contains(&ratio), "rate ratio {ratio:.3}");
}

/// Cubic Lagrange interpolation of nodal values at `x`.
fn lagrange3(s: &FieldState, f: &[f64], x: f64) -> f64 {
    let u = (x - s.x0) / s.dx;
    let j = (u.floor() as usize).clamp(1, f.len() - 3) - 1;
    let t = u - j as f64;
    let w = [
        -(t - 1.0) * (t - 2.0) * (t - 3.0) / 6.0,
        t * (t - 2.0) * (t - 3.0) / 2.0,
        -t * (t - 1.0) * (t - 3.0) / 2.0,
        t * (t - 1.0) * (t - 2.0) / 6.0,
    ];
    (0..4).map(|k| w[k] * f[j + k]).sum()
}

/// Fourth-order centred first difference (second order in the outer two
/// nodes at each end).
fn centred(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| {
            if i >= 2 && i + 2 < n {
                (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / (12.0 * dx)
            } else {
                let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
                (f[b] - f[a]) / ((b - a) as f64 * dx)
            }
        })
        .collect()
}

/// `(φ, φ_τ, φ_ξ)` at `ξ` on one time level.
fn level(s: &FieldState, dphi: &[f64], xi: f64) -> [f64; 3] {
    [
        lagrange3(s, &s.phi1, xi),
        lagrange3(s, &s.phi2, xi),
        lagrange3(s, dphi, xi),
    ]
}

/// Hermite interpolation in time between two levels a distance `dt` apart.
fn hermite(a: [f64; 3], b: [f64; 3], theta: f64, dt: f64) -> [f64; 3] {
    let t = theta;
    let (h00, h10, h01, h11) = (
        2.0 * t.powi(3) - 3.0 * t * t + 1.0,
        t.powi(3) - 2.0 * t * t + t,
        -2.0 * t.powi(3) + 3.0 * t * t,
        t.powi(3) - t * t,
    );
    let (d00, d10, d01, d11) = (
        6.0 * t * t - 6.0 * t,
        3.0 * t * t - 4.0 * t + 1.0,
        -6.0 * t * t + 6.0 * t,
        3.0 * t * t - 2.0 * t,
    );
    [
        h00 * a[0] + h10 * dt * a[1] + h01 * b[0] + h11 * dt * b[1],
        (d00 * a[0] + d10 * dt * a[1] + d01 * b[0] + d11 * dt * b[1]) / dt,
        (1.0 - t) * a[2] + t * b[2],
    ]
}

/// Lab nodes on the slice `t = t_lab` of a frame moving at `c` relative to
/// the rest frame, with their rest-frame coordinates. The rest solution is
/// even in `τ`, so points with `τ < 0` are read at `|τ|` with `φ_τ` negated.
struct Slice {
    c: f64,
    gamma: f64,
    tau: Vec<f64>,
    xi: Vec<f64>,
    phi1: Vec<f64>,
    phi2: Vec<f64>,
}

impl Slice {
    fn new(c: f64, t_lab: f64, xs: &[f64]) -> Self {
        let gamma = 1.0 / (1.0 - c * c).sqrt();
        Self {
            c,
            gamma,
            tau: xs.iter().map(|&x| gamma * (t_lab - c * x)).collect(),
            xi: xs.iter().map(|&x| gamma * (x - c * t_lab)).collect(),
            phi1: vec![f64::NAN; xs.len()],
            phi2: vec![f64::NAN; xs.len()],
        }
    }

    /// Fills the points whose `|τ|` lies between the two rest-frame levels.
    fn fill(&mut self, a: &FieldState, ad: &[f64], b: &FieldState, bd: &[f64]) {
        let dt = b.t - a.t;
        for i in 0..self.tau.len() {
            let s = self.tau[i].abs();
            if s < a.t || s > b.t || !self.phi1[i].is_nan() {
                continue;
            }
            let [f, ft, fx] = hermite(
                level(a, ad, self.xi[i]),
                level(b, bd, self.xi[i]),
                (s - a.t) / dt,
                dt,
            );
            let ft = if self.tau[i] < 0.0 { -ft } else { ft };
            self.phi1[i] = f;
            self.phi2[i] = self.gamma * (ft - self.c * fx);
        }
    }

    fn complete(&self) -> bool {
        self.phi1.iter().chain(&self.phi2).all(|v| v.is_finite())
    }
}

struct BoostComparison {
    /// Largest `|φ_lab − φ_boosted rest|` within 10 of the kink at `t = 20`.
    field_gap: f64,
    /// Largest `|𝓛_lab(t) − 𝓛_rest(t/γ)|` relative to the rest-frame peak.
    lfun_gap: f64,
}

/// Runs φ⁶ with a δ = 0.01 displacement in the rest frame, builds the
/// exactly boosted data at `c = 0.5` from it, runs that in the lab frame and
/// compares the two.
fn boost_comparison(dx: f64) -> BoostComparison {
    let c = 0.5;
    let gamma = 1.0 / (1.0f64 - c * c).sqrt();
    let lab_half_width = 30.0;
    let t_lab = 30.0;
    let t_check = 20.0;
    let with_grid = |mut cfg: RunConfig| {
        cfg.grid.dx = dx;
        cfg.grid.dt = dx / 2.0;
        cfg.grid.sample_every = (0.05 / cfg.grid.dt).round() as u64;
        cfg
    };
    let rest_cfg = with_grid(phi6_config(
        0.01,
        0.0,
        70.0,
        t_lab / gamma + 1.0,
        Boundary::Clamped,
    ));
    let rest = Simulation::new(rest_cfg).unwrap();
    let lab_cfg = with_grid(phi6_config(
        0.0,
        c,
        lab_half_width,
        t_lab,
        Boundary::Clamped,
    ));
    let mut lab = Simulation::new(lab_cfg).unwrap();
    let xs = lab.state.xs();
    let mut start = Slice::new(c, 0.0, &xs);
    let near: Vec<usize> = (0..xs.len())
        .filter(|&i| (xs[i] - c * t_check).abs() <= 10.0)
        .collect();
    let near_x: Vec<f64> = near.iter().map(|&i| xs[i]).collect();
    let mut later = Slice::new(c, t_check, &near_x);

    let mut prev = rest.state.clone();
    let mut prev_d = centred(&prev.phi1, prev.dx);
    let rest_out = rest
        .run_with(|state, _| {
            let d = centred(&state.phi1, state.dx);
            start.fill(&prev, &prev_d, state, &d);
            later.fill(&prev, &prev_d, state, &d);
            prev = state.clone();
            prev_d = d;
            Ok(())
        })
        .unwrap();
    assert!(start.complete() && later.complete());
    lab.state.phi1 = start.phi1.clone();
    lab.state.phi2 = start.phi2.clone();
    let check_step = (t_check / lab.cfg.grid.dt).round() as u64;
    let mut field_gap = f64::NAN;
    let lab_out = lab
        .run_with(|state, _| {
            if state.step == check_step {
                field_gap = near
                    .iter()
                    .zip(&later.phi1)
                    .map(|(&i, &want)| (state.phi1[i] - want).abs())
                    .fold(0.0, f64::max);
            }
            Ok(())
        })
        .unwrap();

    // 𝓛 of the rest run at τ = t/γ, linearly interpolated
    let rest_l = |tau: f64| -> f64 {
        let s = &rest_out.track.samples;
        let k = s.partition_point(|p| p.t <= tau).clamp(1, s.len() - 1);
        let (a, b) = (&s[k - 1], &s[k]);
        a.lfun + (b.lfun - a.lfun) * (tau - a.t) / (b.t - a.t)
    };
    let peak = rest_out
        .track
        .samples
        .iter()
        .map(|p| p.lfun)
        .fold(0.0, f64::max);
    let mut lfun_gap: f64 = 0.0;
    for p in &lab_out.track.samples {
        assert!((p.c - c).abs() < 1e-3);
        lfun_gap = lfun_gap.max((p.lfun - rest_l(p.t / gamma)).abs() / peak);
    }
    BoostComparison {
        field_gap,
        lfun_gap,
    }
}

#[test]
fn boosted_run_is_the_boosted_rest_frame_solution() {
    let coarse = boost_comparison(0.04);
    let fine = boost_comparison(0.02);
    let order = (coarse.field_gap / fine.field_gap).log2();
    assert!(
        order > 1.8,
        "gaps {:.3e}, {:.3e}",
        coarse.field_gap,
        fine.field_gap
    );
    assert!(
        fine.field_gap < 0.02 * 0.01,
        "gap {:.3e} at dx = 0.02",
        fine.field_gap
    );
}

#[test]
fn boosted_run_has_the_rest_frame_lfun_profile() {
    let r = boost_comparison(0.02);
    assert!(
        r.lfun_gap <= 0.05,
        "largest 𝓛 mismatch {:.3} of the rest-frame peak",
        r.lfun_gap
    );
}
