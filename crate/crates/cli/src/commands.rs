//! One function per subcommand. Each builds a [`Report`], prints it and
//! writes the requested CSV files.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::Value;

use kinklab_core::criterion::analytic_branches;
use kinklab_core::dynamics::Simulation;
use kinklab_core::io::{read_snapshot, write_snapshot, write_track, SnapshotMeta};
use kinklab_core::potentials::custom::{parse_list, Definition};
use kinklab_core::potentials::FamilyArgs;
use kinklab_core::spectral::{default_half_width, operators_for};
use kinklab_core::{
    build_kink, classify, classify_family, eigen_lowest, level_set, residuals,
    spectral_convergence, tail_fit, threshold_scan, transformed, validate_wells, Classification,
    ClassifyOptions, Error, Family, KinkGrid, OperatorKind, PairSelector, ParamFamily, Potential,
    Result, RunConfig, WellPair,
};

use crate::output::{num, Report};
use crate::{Cli, Command, ModelArgs, PairArgs, Status};

pub fn dispatch(cli: &Cli) -> Result<Status> {
    match &cli.command {
        Command::Wells { model, out } => wells(cli, model, out.as_deref()),
        Command::Check {
            model,
            pair,
            all_pairs,
            samples,
            out,
        } => check(cli, model, pair, *all_pairs, *samples, out.as_deref()),
        Command::Kink {
            model,
            pair,
            dx,
            half_width,
            out,
        } => kink(cli, model, pair, *dx, *half_width, out.as_deref()),
        Command::Sweep {
            family,
            range,
            pair_start,
            pair_end,
            pair_index,
            tol,
            grid,
            out,
        } => {
            let selector = match (pair_start, pair_end, pair_index) {
                (Some(v), _, _) => PairSelector::StartingAt(*v),
                (_, Some(v), _) => PairSelector::EndingAt(*v),
                (_, _, Some(i)) => PairSelector::Index(*i),
                _ => {
                    return Err(Error::InvalidParameters(
                        "sweep needs --pair-start, --pair-end or --pair-index".into(),
                    ))
                }
            };
            sweep(cli, family, range, selector, *tol, *grid, out.as_deref())
        }
        Command::Figures {
            which,
            out_dir,
            nphi,
            nm,
            phi_max,
            m_min,
            m_max,
        } => figures(cli, which, out_dir, *nphi, *nm, *phi_max, *m_min, *m_max),
        Command::Spectrum {
            model,
            pair,
            operator,
            dx,
            half_width,
            count,
            extrapolate,
            out,
        } => spectrum(
            cli,
            model,
            pair,
            operator,
            *dx,
            *half_width,
            *count,
            *extrapolate,
            out.as_deref(),
        ),
        Command::Simulate {
            config,
            resume,
            out_dir,
        } => simulate(cli, config, resume.as_deref(), out_dir.as_deref()),
        Command::Report { out } => report(cli, out.as_deref()),
    }
}

fn potential(model: &ModelArgs) -> Result<Potential> {
    if let Some(path) = &model.def {
        let label = path
            .file_stem()
            .map_or("custom".into(), |s| s.to_string_lossy().into_owned());
        return Potential::from_definition(label, Definition::load(path)?);
    }
    let name = model
        .family
        .as_deref()
        .ok_or_else(|| Error::InvalidParameters("--family or --def is required".into()))?;
    let args = FamilyArgs {
        m: model.m,
        m_list: model.wells.as_deref().map(parse_list).transpose()?,
        eta: model.eta,
        n: model.n,
    };
    kinklab_core::make_family(Family::from_name(name, &args)?)
}

fn select_pair(p: &Potential, pair: &PairArgs) -> Result<WellPair> {
    if let Some(text) = &pair.pair {
        let v = parse_list(text)?;
        if v.len() != 2 {
            return Err(Error::InvalidParameters(format!(
                "--pair needs two wells, got '{text}'"
            )));
        }
        return p.pair(v[0], v[1]);
    }
    if let Some(i) = pair.pair_index {
        return p.pair_at(i);
    }
    let pairs = p.pairs()?;
    match pairs.iter().find(|pr| pr.right > 0.0) {
        Some(pr) => Ok(*pr),
        None => p.pair_at(0),
    }
}

fn finish(cli: &Cli, report: &Report, out: Option<&Path>) -> Result<()> {
    if let Some(path) = out {
        report.write_csv(path)?;
    }
    report.print(cli.json);
    Ok(())
}

fn wells(cli: &Cli, model: &ModelArgs, out: Option<&Path>) -> Result<Status> {
    let p = potential(model)?;
    let wells = validate_wells(&p, p.window())?;
    let mut r = Report::new("wells", &["index", "zeta", "w2", "omega"]);
    for (i, &z) in wells.iter().enumerate() {
        let w2 = p.jet(z).d2;
        r.push(vec![Value::from(i), num(z), num(w2), num(w2.sqrt())]);
    }
    r.set("potential", p.label());
    r.set("kinks", wells.len().saturating_sub(1));
    finish(cli, &r, out)?;
    Ok(Status::Ok)
}

fn zeta0(c: &Classification, pair: &WellPair) -> Value {
    match *c {
        Classification::SatisfiedAtPoint(z) => num(z),
        Classification::SatisfiedAtLeftEnd => num(pair.left),
        Classification::SatisfiedAtRightEnd => num(pair.right),
        _ => Value::Null,
    }
}

fn check(
    cli: &Cli,
    model: &ModelArgs,
    pair: &PairArgs,
    all_pairs: bool,
    samples: usize,
    out: Option<&Path>,
) -> Result<Status> {
    let p = potential(model)?;
    let pairs = if all_pairs {
        p.pairs()?
    } else {
        vec![select_pair(&p, pair)?]
    };
    let opts = ClassifyOptions {
        n_samples: samples,
        ..ClassifyOptions::default()
    };
    let mut r = Report::new(
        "check",
        &[
            "potential",
            "left",
            "right",
            "classification",
            "zeta0",
            "margin",
            "near_threshold",
        ],
    );
    for pr in &pairs {
        let rep = classify(&transformed(&p, pr), &opts)?;
        r.push(vec![
            Value::from(p.label()),
            num(pr.left),
            num(pr.right),
            Value::from(rep.classification.label()),
            zeta0(&rep.classification, pr),
            num(rep.margin),
            Value::from(rep.near_threshold),
        ]);
        if rep.classification == Classification::ConstantTransformedPotential {
            r.note(format!(
                "kink ({}, {}): V = (W')^2/W - W'' is constant on the range, so the repulsivity test has no content; \
                 the partner operator L0 is a constant shift of -d^2/dx^2 and has no bound states",
                pr.left, pr.right
            ));
        }
        for w in &rep.warnings {
            r.note(format!("kink ({}, {}): {w}", pr.left, pr.right));
        }
    }
    finish(cli, &r, out)?;
    Ok(Status::Ok)
}

fn kink(
    cli: &Cli,
    model: &ModelArgs,
    pair: &PairArgs,
    dx: f64,
    half_width: Option<f64>,
    out: Option<&Path>,
) -> Result<Status> {
    let p = potential(model)?;
    let pr = select_pair(&p, pair)?;
    let grid = match half_width {
        Some(r) => KinkGrid::with_half_width(dx, r),
        None => KinkGrid::new(dx),
    };
    let k = build_kink(&p, &pr, grid)?;
    let res = residuals(&k);
    let mut r = Report::new("kink", &["x", "H", "Hp", "Hpp"]);
    if let Some(path) = out {
        for i in 0..k.len() {
            r.push(vec![num(k.x[i]), num(k.h[i]), num(k.hp[i]), num(k.hpp[i])]);
        }
        r.write_csv(path)?;
        r.rows.clear();
    }
    r.set("left", num(pr.left));
    r.set("right", num(pr.right));
    r.set("points", k.len());
    r.set("dx", num(k.dx));
    r.set("half_width", num(k.r));
    r.set("energy", num(k.norm_sq));
    r.set("omega_minus", num(pr.omega_minus));
    r.set("omega_plus", num(pr.omega_plus));
    r.set("lambda_minus", num(k.tails.lambda_minus));
    r.set("lambda_plus", num(k.tails.lambda_plus));
    r.set("first_integral_residual", num(res.first_integral));
    r.set("second_difference_residual", num(res.second_difference));
    match tail_fit(&k) {
        Ok(fit) => {
            r.set("fitted_omega_minus", num(fit.omega_minus));
            r.set("fitted_omega_plus", num(fit.omega_plus));
        }
        Err(e) => r.note(format!("tail fit: {e}")),
    }
    r.print(cli.json);
    Ok(Status::Ok)
}

fn sweep(
    cli: &Cli,
    family: &str,
    range: &str,
    selector: PairSelector,
    tol: f64,
    grid: usize,
    out: Option<&Path>,
) -> Result<Status> {
    let fam = ParamFamily::parse(family)?;
    let v = parse_list(range)?;
    if v.len() != 2 || !(v[0] < v[1]) {
        return Err(Error::InvalidParameters(format!(
            "--range needs 'lo,hi' with lo < hi, got '{range}'"
        )));
    }
    if grid < 2 {
        return Err(Error::InvalidParameters(
            "--grid needs at least 2 points".into(),
        ));
    }
    let opts = ClassifyOptions::default();
    let values: Vec<f64> = (0..grid)
        .map(|k| v[0] + (v[1] - v[0]) * k as f64 / (grid - 1) as f64)
        .collect();
    let verdicts: Vec<Classification> = values
        .par_iter()
        .map(|&x| Ok(classify_family(&fam.build(x), selector, &opts)?.classification))
        .collect::<Result<_>>()?;
    let first = verdicts
        .windows(2)
        .position(|w| w[0].is_satisfied() != w[1].is_satisfied())
        .ok_or_else(|| {
            Error::BracketInvalid(format!(
                "every grid point in [{}, {}] is {}; no transition in range",
                v[0],
                v[1],
                if verdicts[0].is_satisfied() {
                    "satisfied"
                } else {
                    "not satisfied"
                }
            ))
        })?;
    let t = threshold_scan(
        fam,
        (values[first], values[first + 1]),
        selector,
        tol,
        &opts,
    )?;
    let mut r = Report::new(
        "sweep",
        &[
            "parameter",
            "lo",
            "hi",
            "estimate",
            "class_lo",
            "class_hi",
            "classifications",
        ],
    );
    r.push(vec![
        Value::from(t.parameter.clone()),
        num(t.lo),
        num(t.hi),
        num(t.estimate),
        Value::from(t.class_lo.label()),
        Value::from(t.class_hi.label()),
        Value::from(t.classifications + grid),
    ]);
    let changes = verdicts
        .windows(2)
        .filter(|w| w[0].is_satisfied() != w[1].is_satisfied())
        .count();
    if changes > 1 {
        r.note(format!(
            "{changes} transitions on the coarse grid; the first one was refined"
        ));
    }
    finish(cli, &r, out)?;
    Ok(Status::Ok)
}

#[allow(clippy::too_many_arguments)]
fn figures(
    cli: &Cli,
    which: &str,
    out_dir: &Path,
    nphi: usize,
    nm: usize,
    phi_max: Option<f64>,
    m_min: f64,
    m_max: Option<f64>,
) -> Result<Status> {
    let fam = match which {
        "phi8" => ParamFamily::Phi8,
        "phi10" => ParamFamily::Phi10,
        other => {
            return Err(Error::InvalidParameters(format!(
                "figures are phi8 or phi10, got '{other}'"
            )))
        }
    };
    let (phi_hi, m_hi) = match fam {
        ParamFamily::Phi8 => (phi_max.unwrap_or(2.0), m_max.unwrap_or(3.5)),
        _ => (phi_max.unwrap_or(1.6), m_max.unwrap_or(2.5)),
    };
    if nphi < 2 || nm < 2 || !(phi_hi > 0.0) || !(m_hi > m_min) || !(m_min > 0.0) {
        return Err(Error::InvalidParameters(
            "figure grids need 2+ points and increasing ranges".into(),
        ));
    }
    let phi: Vec<f64> = (0..nphi)
        .map(|k| phi_hi * k as f64 / (nphi - 1) as f64)
        .collect();
    let m: Vec<f64> = (0..nm)
        .map(|k| m_min + (m_hi - m_min) * k as f64 / (nm - 1) as f64)
        .collect();
    let ls = level_set(fam, &phi, &m)?;

    let mut sign = Report::new("figure-sign", &["phi", "m", "vprime", "sign"]);
    for (i, &mv) in m.iter().enumerate() {
        for (j, &x) in phi.iter().enumerate() {
            sign.push(vec![
                num(x),
                num(mv),
                num(ls.vprime[i][j]),
                Value::from(ls.sign[i][j]),
            ]);
        }
    }
    let mut contour = Report::new("figure-contour", &["phi1", "m1", "phi2", "m2"]);
    for &((x1, m1), (x2, m2)) in &ls.contour {
        contour.push(vec![num(x1), num(m1), num(x2), num(m2)]);
    }
    let mut branches = Report::new("figure-branches", &["phi", "m_lower", "m_upper"]);
    for &x in &phi {
        let b = analytic_branches(fam, x);
        let at = |k: usize| b.get(k).copied().map_or(Value::Null, num);
        branches.push(vec![num(x), at(0), at(1)]);
    }
    let paths: Vec<PathBuf> = ["sign", "contour", "branches"]
        .iter()
        .map(|s| out_dir.join(format!("{which}_{s}.csv")))
        .collect();
    sign.write_csv(&paths[0])?;
    contour.write_csv(&paths[1])?;
    branches.write_csv(&paths[2])?;

    let mut r = Report::new("figures", &["file", "rows"]);
    for (p, n) in paths
        .iter()
        .zip([sign.rows.len(), contour.rows.len(), branches.rows.len()])
    {
        r.push(vec![Value::from(p.display().to_string()), Value::from(n)]);
    }
    r.print(cli.json);
    Ok(Status::Ok)
}

#[allow(clippy::too_many_arguments)]
fn spectrum(
    cli: &Cli,
    model: &ModelArgs,
    pair: &PairArgs,
    operator: &str,
    dx: f64,
    half_width: Option<f64>,
    count: usize,
    extrapolate: bool,
    out: Option<&Path>,
) -> Result<Status> {
    let p = potential(model)?;
    let pr = select_pair(&p, pair)?;
    let tp = transformed(&p, &pr);
    let kind = OperatorKind::parse(operator)?;
    let r_dom = half_width.unwrap_or_else(|| default_half_width(&pr));
    let label = |m: &kinklab_core::ModeKind| Value::from(format!("{m:?}").to_ascii_lowercase());
    let mut r;
    if extrapolate {
        let conv = spectral_convergence(&tp, kind, dx, r_dom, count)?;
        let finest = conv.finest();
        r = Report::new(
            "spectrum",
            &["index", "eigenvalue", "finest", "order", "mode", "residual"],
        );
        for i in 0..finest.eigenvalues.len() {
            r.push(vec![
                Value::from(i),
                num(conv.extrapolated[i]),
                num(finest.eigenvalues[i]),
                conv.orders[i].map_or(Value::Null, num),
                label(&conv.modes[i]),
                num(finest.residuals[i]),
            ]);
        }
        r.set("edge", num(conv.edge));
        r.set("dx_finest", num(finest.dx));
    } else {
        let (_, _, l, l0) = operators_for(&tp, dx, r_dom)?;
        let op = if kind == OperatorKind::L { l } else { l0 };
        let rep = eigen_lowest(&op, count)?;
        r = Report::new("spectrum", &["index", "eigenvalue", "mode", "residual"]);
        for i in 0..rep.eigenvalues.len() {
            r.push(vec![
                Value::from(i),
                num(rep.eigenvalues[i]),
                label(&rep.modes[i]),
                num(rep.residuals[i]),
            ]);
        }
        r.set("edge", num(rep.edge));
    }
    r.set("operator", kind.label());
    r.set("half_width", num(r_dom));
    finish(cli, &r, out)?;
    Ok(Status::Ok)
}

fn simulate(
    cli: &Cli,
    config: &Path,
    resume: Option<&Path>,
    out_dir: Option<&Path>,
) -> Result<Status> {
    let cfg = RunConfig::load(config)?;
    let dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let dt = cfg.grid.dt;
    let sim = match resume {
        Some(path) => Simulation::resume(cfg.clone(), read_snapshot(path)?)?,
        None => Simulation::new(cfg.clone())?,
    };
    let stride = cfg
        .output
        .snapshot_every
        .map_or(0, |every| ((every / dt).round() as u64).max(1));
    let out = sim.run_with(|state, (c, y)| {
        if stride > 0 && state.step % stride == 0 {
            let meta = SnapshotMeta {
                t: state.t,
                step: state.step,
                dt,
                c,
                y,
            };
            write_snapshot(
                &dir.join(format!("snapshot_{:.3}.csv", state.t)),
                state,
                meta,
            )?;
        }
        Ok(())
    })?;
    let track_path = dir.join("track.csv");
    write_track(&track_path, &out.track)?;

    let s = &out.summary;
    let mut r = Report::new("simulate", &[]);
    r.set("steps", s.steps);
    r.set("t_end", num(s.t_end));
    r.set("c_plus", num(s.c_plus));
    r.set("c_plus_std", num(s.c_plus_std));
    r.set("max_c_deviation", num(s.max_c_deviation));
    r.set("l_integral", num(s.l_integral));
    r.set("l_peak", num(s.l_peak));
    r.set("l_final", num(s.l_final));
    r.set("decay_ratio", num(s.decay_ratio));
    r.set("energy_drift", num(s.energy_drift));
    r.set("invariant_drift", num(s.invariant_drift));
    r.set("max_residual", num(s.max_residual));
    if let Some(o) = s.max_orbital {
        r.set("max_orbital", num(o));
    }
    r.set("track", track_path.display().to_string());
    if cfg.grid.boundary == kinklab_core::Boundary::Sponge {
        r.note("sponge boundaries damp radiation, so energy and M are not conserved in this run");
    }
    r.print(cli.json);
    Ok(Status::Ok)
}

enum Expect {
    Constant,
    Satisfied,
    Inconclusive,
}

fn report(cli: &Cli, out: Option<&Path>) -> Result<Status> {
    use Expect::*;
    let dsg2 = kinklab_core::make_family(Family::DsgTwo { eta: -1.0 })?;
    let z = dsg2
        .wells()
        .iter()
        .copied()
        .find(|w| *w > 0.0 && *w < 4.0)
        .ok_or_else(|| Error::WellNotFound("DSG-II well between 0 and 4".into()))?;
    let mut cases: Vec<(String, Family, f64, f64, Expect)> = vec![
        (
            "sine-Gordon".into(),
            Family::SineGordon,
            0.0,
            2.0 * PI,
            Constant,
        ),
        ("phi4".into(), Family::Phi4, -1.0, 1.0, Inconclusive),
        ("phi6".into(), Family::Phi6, 0.0, 1.0, Satisfied),
        ("phi6 mirror".into(), Family::Phi6, -1.0, 0.0, Satisfied),
        (
            "phi8 m=1.5".into(),
            Family::Phi8 { m: 1.5 },
            -1.0,
            1.0,
            Satisfied,
        ),
        (
            "phi8 m=1.5".into(),
            Family::Phi8 { m: 1.5 },
            1.0,
            1.5,
            Inconclusive,
        ),
        (
            "phi8 m=3".into(),
            Family::Phi8 { m: 3.0 },
            1.0,
            3.0,
            Satisfied,
        ),
        (
            "phi8 m=3".into(),
            Family::Phi8 { m: 3.0 },
            -1.0,
            1.0,
            Inconclusive,
        ),
        (
            "phi10 m=2".into(),
            Family::Phi10 { m: 2.0 },
            0.0,
            1.0,
            Satisfied,
        ),
        (
            "phi10 m=2".into(),
            Family::Phi10 { m: 2.0 },
            1.0,
            2.0,
            Satisfied,
        ),
        (
            "DSG-I eta=-0.1".into(),
            Family::DsgOne { eta: -0.1 },
            -2.0 * PI,
            2.0 * PI,
            Satisfied,
        ),
        (
            "DSG-I eta=1".into(),
            Family::DsgOne { eta: 1.0 },
            -2.0 * PI,
            2.0 * PI,
            Inconclusive,
        ),
        (
            "DSG-II eta=-1 odd".into(),
            Family::DsgTwo { eta: -1.0 },
            -z,
            z,
            Satisfied,
        ),
        (
            "DSG-II eta=-1 other".into(),
            Family::DsgTwo { eta: -1.0 },
            z,
            4.0 * PI - z,
            Inconclusive,
        ),
    ];
    for n in [2, 5, 10] {
        cases.push((
            format!("W4n n={n} odd"),
            Family::SgLimitEven { n },
            -PI,
            PI,
            Inconclusive,
        ));
    }
    let opts = ClassifyOptions::default();
    let rows: Vec<Vec<Value>> = cases
        .par_iter()
        .map(|(name, fam, l, rr, expect)| -> Result<Vec<Value>> {
            let p = kinklab_core::make_family(fam.clone())?;
            let pr = p.pair(*l, *rr)?;
            let c = classify(&transformed(&p, &pr), &opts)?.classification;
            let (want, ok) = match expect {
                Constant => (
                    "constant",
                    c == Classification::ConstantTransformedPotential,
                ),
                Satisfied => ("satisfied", c.is_satisfied()),
                Inconclusive => ("inconclusive", c == Classification::Inconclusive),
            };
            Ok(vec![
                Value::from(name.clone()),
                Value::from(format!("({l:.7}, {rr:.7})")),
                Value::from(want),
                Value::from(c.to_string()),
                Value::from(ok),
            ])
        })
        .collect::<Result<_>>()?;
    let mut r = Report::new("report", &["case", "kink", "expected", "result", "match"]);
    for row in rows {
        r.push(row);
    }
    let thresholds = [
        (
            "phi8 threshold",
            ParamFamily::Phi8,
            (1.1, 3.0),
            PairSelector::StartingAt(-1.0),
            (2.0 + 3f64.sqrt()).sqrt(),
        ),
        (
            "phi8 threshold",
            ParamFamily::Phi8,
            (1.1, 4.0),
            PairSelector::StartingAt(1.0),
            5f64.sqrt(),
        ),
        (
            "phi10 threshold",
            ParamFamily::Phi10,
            (1.1, 3.0),
            PairSelector::StartingAt(1.0),
            21f64.sqrt() / 3.0,
        ),
    ];
    for (name, fam, range, sel, exact) in thresholds {
        let t = threshold_scan(fam, range, sel, 1e-7, &opts)?;
        let kink = match sel {
            PairSelector::StartingAt(v) if v < 0.0 => "(-1, 1)",
            _ => "(1, m)",
        };
        r.push(vec![
            Value::from(name),
            Value::from(kink),
            Value::from(format!("{exact:.7}")),
            Value::from(format!("{:.7}", t.estimate)),
            Value::from((t.estimate - exact).abs() <= 1e-6),
        ]);
    }
    let failed = r
        .rows
        .iter()
        .filter(|row| row[4] != Value::Bool(true))
        .count();
    r.set("rows", r.rows.len());
    r.set("mismatches", failed);
    finish(cli, &r, out)?;
    Ok(if failed == 0 {
        Status::Ok
    } else {
        Status::ChecksFailed
    })
}
