use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use casimir_core::force::{
    force_spectrum, term_integrand, term_prefactor, term_region, time_domain, Force2Term, ForceOrder, ForceSpectrum,
    Mirror,
};
use casimir_core::observables::{efficiency_massive, efficiency_two_sided, spectrum_on_grid, sweep_totals};
use casimir_core::validation::{cross_check_spectrum, oracle_integral_1d, oracle_integral_2d, simpson, OracleReport};
use casimir_core::{
    make_grid, make_symmetric_grid, CavityConfig, ConfigError, FrequencyGrid, ModulationProfile, QuadratureSpec,
    Settings, SpectralDensity,
};

use crate::args::{Command, Common, EfficiencyArgs, EfficiencyMode, ForceArgs, OrderArg, SpectrumArgs, SweepArgs};
use crate::error::CliError;
use crate::output::{num, write_text, CsvOut};
use crate::plot::line_plot;

pub struct Context {
    cfg: CavityConfig,
    profile: ModulationProfile,
    spec: QuadratureSpec,
    points_per_period: usize,
    out: PathBuf,
    plot: bool,
    verify: bool,
}

/// Flag values take precedence over the file.
pub fn merge_overrides(mut settings: Settings, common: &Common) -> Settings {
    if let Some(r) = common.rel_tol {
        settings.quadrature.rel_tol = Some(r);
    }
    if let Some(c) = common.cutoff {
        settings.cutoff = Some(c);
    }
    settings
}

/// Absolute input paths, so a manifest stays usable from anywhere.
pub fn absolutize(command: &Command) -> Command {
    let abs = |p: &PathBuf| std::path::absolute(p).unwrap_or_else(|_| p.clone());
    let mut c = command.clone();
    if let Command::Efficiency(a) = &mut c {
        a.left = a.left.as_ref().map(abs);
        a.right = a.right.as_ref().map(abs);
        a.weight = a.weight.as_ref().map(abs);
    }
    if let Some(common) = match &mut c {
        Command::Spectrum(a) => Some(&mut a.common),
        Command::Sweep(a) => Some(&mut a.common),
        Command::Force(a) => Some(&mut a.common),
        Command::Efficiency(a) => Some(&mut a.common),
        Command::Replay(_) => None,
    } {
        common.config = abs(&common.config);
    }
    c
}

fn context(settings: &Settings, common: &Common, out: &Path) -> Result<Context, CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Output(format!("{}: {e}", out.display())))?;
    Ok(Context {
        cfg: settings.cavity()?,
        profile: settings.profile()?,
        spec: settings.quadrature_spec()?,
        points_per_period: settings.points_per_period()?,
        out: out.to_path_buf(),
        plot: common.plot,
        verify: common.verify,
    })
}

/// Runs a subcommand with already-merged settings and returns the files written.
pub fn run(command: &Command, settings: &Settings, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let common = command.common().ok_or_else(|| CliError::Config("a manifest cannot replay a replay".into()))?;
    let ctx = context(settings, common, out)?;
    match command {
        Command::Spectrum(a) => spectrum(&ctx, a),
        Command::Sweep(a) => sweep(&ctx, a),
        Command::Force(a) => force(&ctx, a),
        Command::Efficiency(a) => efficiency(&ctx, a),
        Command::Replay(_) => unreachable!(),
    }
}

fn require_dirichlet(cfg: &CavityConfig) -> Result<(), CliError> {
    if cfg.left_coupling().is_dirichlet() {
        Ok(())
    } else {
        Err(ConfigError::NotDirichlet.into())
    }
}

fn write_verify(ctx: &Context, reports: &[OracleReport]) -> Result<PathBuf, CliError> {
    let mut w = CsvOut::create(
        &ctx.out,
        "verify.csv",
        &["quantity", "oracle_value", "main_value", "relative_difference", "resolution", "passed"],
    )?;
    for r in reports {
        w.row([
            r.quantity.clone(),
            num(r.oracle_value),
            num(r.main_value),
            num(r.relative_difference),
            r.resolution.clone(),
            r.passed.to_string(),
        ])?;
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        log::warn!("{failed} of {} oracle checks failed; see verify.csv", reports.len());
    }
    w.finish()
}

fn spectrum(ctx: &Context, a: &SpectrumArgs) -> Result<Vec<PathBuf>, CliError> {
    require_dirichlet(&ctx.cfg)?;
    if !(a.omega_max > 0.0 && a.omega_max <= ctx.cfg.cutoff()) {
        return Err(CliError::Config(format!(
            "--omega-max {} must lie in (0, cutoff = {}]",
            a.omega_max,
            ctx.cfg.cutoff()
        )));
    }
    let grid = make_grid(&ctx.cfg, a.omega_max, ctx.points_per_period)?;
    let n = spectrum_on_grid(&ctx.cfg, &ctx.profile, &grid, &ctx.spec)?;
    let mut w = CsvOut::create(&ctx.out, "spectrum.csv", &["omega", "n"])?;
    for (omega, value) in n.iter() {
        w.row([num(omega), num(value)])?;
    }
    let mut outputs = vec![w.finish()?];
    if ctx.plot {
        let pts: Vec<(f64, f64)> = n.iter().collect();
        outputs.push(write_text(&ctx.out, "spectrum.svg", &line_plot("Emission spectrum", "ω", "n(ω)", &pts))?);
    }
    if ctx.verify {
        let reports = cross_check_spectrum(&ctx.cfg, &ctx.profile, 20, 0, &ctx.spec)?;
        outputs.push(write_verify(ctx, &reports)?);
    }
    Ok(outputs)
}

fn sweep(ctx: &Context, a: &SweepArgs) -> Result<Vec<PathBuf>, CliError> {
    require_dirichlet(&ctx.cfg)?;
    if !(a.omega_min > 0.0 && a.omega_max > a.omega_min && a.omega_max.is_finite()) || a.steps < 2 {
        return Err(CliError::Config(
            "sweep needs 0 < --omega-min < --omega-max and --steps >= 2".into(),
        ));
    }
    let last = a.steps - 1;
    let drives: Vec<f64> = (0..a.steps)
        .map(|k| {
            if k == last {
                a.omega_max
            } else {
                a.omega_min + (a.omega_max - a.omega_min) * k as f64 / last as f64
            }
        })
        .collect();
    let rows = sweep_totals(&ctx.cfg, &drives, &ctx.spec)?;
    let mut w = CsvOut::create(&ctx.out, "sweep.csv", &["omega_drive", "N", "P", "E", "error"])?;
    for r in &rows {
        match &r.totals {
            Ok(t) => w.row([
                num(r.drive),
                num(t.particle_number),
                num(t.momentum),
                num(t.energy),
                String::new(),
            ])?,
            Err(e) => w.row([num(r.drive), String::new(), String::new(), String::new(), e.to_string()])?,
        }
    }
    let mut outputs = vec![w.finish()?];
    if rows.iter().all(|r| r.totals.is_err()) {
        return Err(CliError::Numeric("every sweep point failed; see the error column".into()));
    }
    if ctx.plot {
        let series = |f: fn(&casimir_core::RadiationTotals) -> f64| -> Vec<(f64, f64)> {
            rows.iter()
                .filter_map(|r| r.totals.as_ref().ok().map(|t| (r.drive, f(t))))
                .collect()
        };
        outputs.push(write_text(
            &ctx.out,
            "N.svg",
            &line_plot("Particle number", "Ω", "N", &series(|t| t.particle_number)),
        )?);
        outputs.push(write_text(&ctx.out, "P.svg", &line_plot("Momentum", "Ω", "P", &series(|t| t.momentum)))?);
    }
    if ctx.verify {
        let mut reports = Vec::new();
        let (l, lam2) = (ctx.cfg.length(), ctx.cfg.lambda0().powi(2));
        for idx in [0, rows.len() / 2, rows.len() - 1] {
            let row = &rows[idx];
            let Ok(t) = &row.totals else { continue };
            let drive = row.drive;
            // Unsimplified form, 4λ₀² sin²(ωL) sin²((Ω-ω)L) / (ω(Ω-ω)); zero at both ends.
            let n_int = move |w: f64| {
                if w <= 0.0 || w >= drive {
                    0.0
                } else {
                    4.0 * lam2 * (w * l).sin().powi(2) * ((drive - w) * l).sin().powi(2) / (w * (drive - w))
                }
            };
            let panels = 100_000;
            let n_est = oracle_integral_1d(n_int, 0.0, drive, panels)?;
            let p_est = oracle_integral_1d(move |w| w * n_int(w), 0.0, drive, panels)?;
            let res = format!("simpson {panels}/{} panels", 2 * panels);
            reports.push(OracleReport::compare(
                format!("N({drive})"),
                n_est.refined,
                t.particle_number,
                1e-300,
                1e-8,
                res.clone(),
            ));
            reports.push(OracleReport::compare(format!("P({drive})"), p_est.refined, t.momentum, 1e-300, 1e-8, res));
        }
        outputs.push(write_verify(ctx, &reports)?);
    }
    Ok(outputs)
}

fn force_csv(ctx: &Context, fs: &ForceSpectrum) -> Result<PathBuf, CliError> {
    let name = match fs.order() {
        ForceOrder::First => "force_order1.csv",
        ForceOrder::Second => "force_order2.csv",
        _ => "force.csv",
    };
    let mut w = CsvOut::create(&ctx.out, name, &["omega", "reF_left", "imF_left", "reF_right", "imF_right", "order"])?;
    let (l, r) = (fs.mirror(Mirror::Left), fs.mirror(Mirror::Right));
    for (k, &omega) in fs.frequencies().iter().enumerate() {
        w.row([
            num(omega),
            num(l[k].value.re),
            num(l[k].value.im),
            num(r[k].value.re),
            num(r[k].value.im),
            fs.order().label().to_string(),
        ])?;
    }
    w.finish()
}

type Bracket = Box<dyn Fn(f64) -> (f64, f64) + Sync>;

/// The first-order brackets in unsimplified form, written independently of the library.
fn literal_brackets(mirror: Mirror, w: f64, l: f64) -> [Bracket; 2] {
    let e = move |x: f64| ((x * l).cos(), (x * l).sin());
    let mul = |a: (f64, f64), b: (f64, f64)| (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0);
    let sub = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0, a.1 - b.1);
    let add = |a: (f64, f64), b: (f64, f64)| (a.0 + b.0, a.1 + b.1);
    let one = (1.0, 0.0);
    match mirror {
        Mirror::Left => [
            Box::new(move |u| sub(sub(e(2.0 * u - w), one), mul(e(w), sub(one, e(2.0 * (u - w)))))),
            Box::new(move |u| sub(mul(e(w), sub(one, e(-2.0 * u))), mul(e(-(w + 2.0 * u)), sub(one, e(2.0 * u))))),
        ],
        Mirror::Right => [
            Box::new(move |u| {
                sub(
                    add(sub(one, e(2.0 * (u - w))), mul(sub(one, e(2.0 * u)), sub(e(2.0 * (w - u)), one))),
                    mul(e(2.0 * u), sub(one, e(-2.0 * (u - w)))),
                )
            }),
            Box::new(move |u| {
                sub(
                    sub(mul(e(2.0 * (w - u)), sub(one, e(2.0 * u))), mul(sub(e(-2.0 * u), one), sub(one, e(2.0 * u)))),
                    sub(one, e(-2.0 * u)),
                )
            }),
        ],
    }
}

fn verify_force(ctx: &Context, spectra: &[ForceSpectrum]) -> Result<Vec<OracleReport>, CliError> {
    let mut reports = Vec::new();
    let cutoff = ctx.cfg.cutoff();
    let l = ctx.cfg.length();
    for fs in spectra {
        let k0 = fs.zero_index().expect("symmetric grid holds 0");
        let kq = k0 + (fs.frequencies().len() - 1 - k0) / 2;
        match fs.order() {
            ForceOrder::First => {
                let panels = 2 * ((8.0 * cutoff / (PI / l) * 64.0) as usize / 2).max(1000);
                for k in [k0, kq] {
                    let w = fs.frequencies()[k];
                    for mirror in [Mirror::Left, Mirror::Right] {
                        let [upper, lower] = literal_brackets(mirror, w, l);
                        let re = simpson(|u| upper(u).0, w, cutoff, panels)? + simpson(|u| lower(u).0, 0.0, cutoff, panels)?;
                        let im = simpson(|u| upper(u).1, w, cutoff, panels)? + simpson(|u| lower(u).1, 0.0, cutoff, panels)?;
                        // λ₀ f[ω] / (4i · 2π) · (re + i im)
                        let c = ctx.cfg.lambda0() / (8.0 * PI);
                        let f = ctx.profile.fourier(w);
                        let front = (f.re * c, f.im * c);
                        let prod = (front.0 * re - front.1 * im, front.0 * im + front.1 * re);
                        let oracle = (prod.1, -prod.0);
                        let main = fs.mirror(mirror)[k];
                        let floor = 1e-9 * main.scale;
                        let res = format!("simpson {panels} panels");
                        reports.push(OracleReport::compare(
                            format!("Re F1_{mirror:?}({w})"),
                            oracle.0,
                            main.value.re,
                            floor,
                            1e-6,
                            res.clone(),
                        ));
                        reports.push(OracleReport::compare(
                            format!("Im F1_{mirror:?}({w})"),
                            oracle.1,
                            main.value.im,
                            floor,
                            1e-6,
                            res,
                        ));
                    }
                }
            }
            ForceOrder::Second => {
                let (nx, ny) = (2000, 1000);
                let lam2 = ctx.cfg.lambda0().powi(2);
                let mut total_oracle = 0.0;
                let mut change = 0.0;
                for term in Force2Term::ALL {
                    let region = term_region(term, 0.0, cutoff);
                    if region.x.0 == region.x.1 {
                        continue;
                    }
                    let est = oracle_integral_2d(term_integrand(term, &ctx.profile, 0.0, l), region.x, region.y, nx, ny)?;
                    let front = term_prefactor(term, &ctx.profile, 0.0, l) * lam2;
                    total_oracle += (front * est.refined).re;
                    change += front.norm() * est.change();
                }
                let total = fs.total()[k0].re;
                let mut r = OracleReport::compare(
                    "F2_total(0)",
                    total_oracle,
                    total,
                    0.0,
                    1e-6,
                    format!("midpoint {}x{}", 2 * nx, 2 * ny),
                );
                // A midpoint grid this coarse is only as good as its own refinement step.
                r.passed = (total_oracle - total).abs() <= (3.0 * change).max(1e-6 * total.abs());
                reports.push(r);
            }
            _ => {}
        }
    }
    Ok(reports)
}

fn force(ctx: &Context, a: &ForceArgs) -> Result<Vec<PathBuf>, CliError> {
    require_dirichlet(&ctx.cfg)?;
    if !(a.omega_max > 0.0 && a.omega_max < ctx.cfg.cutoff()) {
        return Err(CliError::Config(format!(
            "--omega-max {} must lie in (0, cutoff = {})",
            a.omega_max,
            ctx.cfg.cutoff()
        )));
    }
    let grid = make_symmetric_grid(&ctx.cfg, a.omega_max, ctx.points_per_period)?;
    let orders: &[ForceOrder] = match a.order {
        OrderArg::First => &[ForceOrder::First],
        OrderArg::Second => &[ForceOrder::Second],
        OrderArg::Both => &[ForceOrder::First, ForceOrder::Second],
    };
    if orders.contains(&ForceOrder::Second) {
        log::warn!(
            "second-order force needs six double integrals at each of {} frequencies; this can take minutes",
            grid.len() / 2 + 1
        );
    }
    let spectra = orders
        .iter()
        .map(|&o| force_spectrum(&ctx.cfg, &ctx.profile, &grid, o, &ctx.spec))
        .collect::<Result<Vec<_>, _>>()?;
    let mut outputs = Vec::new();
    let mut impulse_text = format!("cutoff {}\n", num(ctx.cfg.cutoff()));
    for fs in &spectra {
        outputs.push(force_csv(ctx, fs)?);
        let k = fs.zero_index().expect("symmetric grid holds 0");
        let (l, r) = (fs.mirror(Mirror::Left)[k], fs.mirror(Mirror::Right)[k]);
        impulse_text.push_str(&format!(
            "order {} impulse {} scale {} error {}\n",
            fs.order().label(),
            num(casimir_core::force::impulse(fs)?),
            num(l.scale + r.scale),
            num(l.error_estimate + r.error_estimate)
        ));
    }
    outputs.push(write_text(&ctx.out, "impulse.txt", &impulse_text)?);
    let combined = match spectra.as_slice() {
        [one] => one.clone(),
        [a, b] => a.summed(b)?,
        _ => unreachable!(),
    };
    if ctx.plot {
        let pts: Vec<(f64, f64)> = combined.frequencies().iter().copied().zip(combined.total().iter().map(|z| z.re)).collect();
        outputs.push(write_text(&ctx.out, "force.svg", &line_plot("Force spectrum", "ω", "Re F[ω]", &pts))?);
    }
    if let Some(t_max) = a.t_max {
        if t_max.is_nan() || t_max <= 0.0 || a.t_points < 2 {
            return Err(CliError::Config("--t-max must be positive and --t-points >= 2".into()));
        }
        let last = a.t_points - 1;
        let times: Vec<f64> = (0..a.t_points).map(|k| -t_max + 2.0 * t_max * k as f64 / last as f64).collect();
        let signal = time_domain(&combined, &times)?;
        let mut w = CsvOut::create(&ctx.out, "force_time.csv", &["t", "F"])?;
        for (t, f) in signal.times.iter().zip(&signal.values) {
            w.row([num(*t), num(*f)])?;
        }
        outputs.push(w.finish()?);
        if ctx.plot {
            let pts: Vec<(f64, f64)> = signal.times.iter().copied().zip(signal.values.iter().copied()).collect();
            outputs.push(write_text(&ctx.out, "force_time.svg", &line_plot("Force", "t", "F(t)", &pts))?);
        }
    }
    if ctx.verify {
        let reports = verify_force(ctx, &spectra)?;
        outputs.push(write_verify(ctx, &reports)?);
    }
    Ok(outputs)
}

fn read_spectrum(path: &Path, ctx: &Context) -> Result<SpectralDensity, CliError> {
    let bad = |msg: String| CliError::Config(format!("{}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let field = |j: usize| -> Result<f64, CliError> {
            rec.get(j)
                .ok_or_else(|| bad(format!("row {} has fewer than two columns", i + 2)))?
                .parse::<f64>()
                .map_err(|e| bad(format!("row {}: {e}", i + 2)))
        };
        points.push(field(0)?);
        values.push(field(1)?);
    }
    let grid = FrequencyGrid::from_points(points, ctx.points_per_period, ctx.cfg.length()).map_err(|e| bad(e.to_string()))?;
    Ok(SpectralDensity::new(grid, values)?)
}

fn efficiency(ctx: &Context, a: &EfficiencyArgs) -> Result<Vec<PathBuf>, CliError> {
    let need = |flag: &str| CliError::Config(format!("--{flag} is required for this mode"));
    let show = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
    let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
    let mut reports = Vec::new();
    let eta = match a.mode {
        EfficiencyMode::TwoSided => {
            let left = read_spectrum(a.left.as_ref().ok_or_else(|| need("left"))?, ctx)?;
            let right = read_spectrum(a.right.as_ref().ok_or_else(|| need("right"))?, ctx)?;
            efficiency_two_sided(&left, &right, a.k)?
        }
        EfficiencyMode::Massive => {
            let mass = a.mass.ok_or_else(|| need("mass"))?;
            let lo = a.band_lo.ok_or_else(|| need("band-lo"))?;
            let hi = a.band_hi.ok_or_else(|| need("band-hi"))?;
            let weight = a.weight.as_ref().map(|p| read_spectrum(p, ctx)).transpose()?;
            let eta = efficiency_massive(mass, a.k, (lo, hi), weight.as_ref(), &ctx.spec)?;
            if ctx.verify && weight.is_none() {
                let panels = 200_000;
                let num_est = oracle_integral_1d(|w| (w * w - mass * mass).max(0.0).sqrt(), lo, hi, panels)?;
                let den_est = oracle_integral_1d(|w| w, lo, hi, panels)?;
                reports.push(OracleReport::compare(
                    "eta_massive",
                    a.k * num_est.refined / den_est.refined,
                    eta,
                    0.0,
                    1e-6,
                    format!("simpson {} panels", 2 * panels),
                ));
            }
            eta
        }
    };
    let mode = match a.mode {
        EfficiencyMode::TwoSided => "two_sided",
        EfficiencyMode::Massive => "massive",
    };
    let mut w = CsvOut::create(
        &ctx.out,
        "efficiency.csv",
        &["mode", "k", "mass", "band_lo", "band_hi", "left", "right", "weight", "eta"],
    )?;
    w.row([
        mode.to_string(),
        num(a.k),
        opt(a.mass),
        opt(a.band_lo),
        opt(a.band_hi),
        show(&a.left),
        show(&a.right),
        show(&a.weight),
        num(eta),
    ])?;
    let mut outputs = vec![w.finish()?];
    if ctx.verify {
        outputs.push(write_verify(ctx, &reports)?);
    }
    Ok(outputs)
}
