use std::f64::consts::PI;

use nalgebra::DVector;
use serde::Serialize;
use willmore_core::flatness::{reifenberg_scan, write_flatness_csv, FlatnessReport, DEFAULT_SPACING_RATIO};
use willmore_core::geom::{load_mesh, sample_mesh, Registry, Surface, SurfaceParams, TriMesh};
use willmore_core::inversion::{
    antisymmetry_check, density_formula_check, density_identity_check, fit_sphere, invert, inverted_points,
    sample_params, AntisymmetryRow, DensityFormulaReport, DensityIdentityReport, SphereFit,
};
use willmore_core::measure::density::{density_rows, extrapolate_infinity, geometric_radii, DensityRow, Extrapolation};
use willmore_core::measure::monotonicity::{
    monotonicity_check, radial_deviation_energy, MonotonicityLedger, RadialDeviation, DEFAULT_DELTAS,
};
use willmore_core::measure::quadrature::QuadOptions;
use willmore_core::measure::willmore::mesh_willmore_estimate;
use willmore_core::topology::{
    count_ends, euler_genus, finite_topology_verdict, total_curvature, EndDecomposition, EulerGenus,
    FiniteTopologyReport, SurfaceMesh, TotalCurvature, VerdictOptions,
};
use willmore_core::{Error, Result};

use crate::config::{Format, RunConfig};
use crate::output::{row, SummaryRow, Written};

pub enum Input {
    Surface(Surface),
    Mesh(TriMesh),
}

pub fn load_input(cfg: &RunConfig) -> Result<Input> {
    if let Some(path) = &cfg.mesh {
        return Ok(Input::Mesh(load_mesh(path, None)?));
    }
    let name = cfg.surface.as_deref().unwrap_or_default();
    let mut p = match &cfg.params {
        Some(s) => SurfaceParams::parse(s)?,
        None => SurfaceParams::new(),
    };
    if let Some(o) = cfg.offset {
        p.set("offset", o);
    }
    if let Some(c) = cfg.cutoff {
        p.set("cutoff", c);
    }
    Ok(Input::Surface(Registry::builtin().build(name, &p)?))
}

fn need_surface(input: Input, command: &str) -> Result<Surface> {
    match input {
        Input::Surface(s) => Ok(s),
        Input::Mesh(_) => Err(Error::InvalidParameter(format!(
            "{command} needs a catalog surface, not a mesh"
        ))),
    }
}

pub fn parse_point(s: &str, dim: usize) -> Result<DVector<f64>> {
    let xs: Vec<f64> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::InvalidParameter(format!("'{t}' is not a coordinate")))
        })
        .collect::<Result<_>>()?;
    if xs.len() != dim {
        return Err(Error::InvalidParameter(format!("point '{s}' needs {dim} coordinates")));
    }
    Ok(DVector::from_vec(xs))
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| *x > 0.0 && x.is_finite())
                .ok_or_else(|| Error::InvalidParameter(format!("'{t}' is not a positive number")))
        })
        .collect()
}

fn center(cfg: &RunConfig, dim: usize) -> Result<DVector<f64>> {
    match &cfg.center {
        Some(c) => parse_point(c, dim),
        None => Ok(DVector::zeros(dim)),
    }
}

/// Largest extent of a sampled mesh of the surface about `c`.
fn extent(surface: &Surface, c: &DVector<f64>) -> Result<f64> {
    let mut r: f64 = 0.0;
    for chart in &surface.charts {
        let (gu, gv) = chart.domain().grid;
        let m = sample_mesh(chart.as_ref(), (gu + 1, gv + 1))?;
        r = m.vertices.iter().map(|v| (v - c).norm()).fold(r, f64::max);
    }
    Ok(r)
}

/// `r_max` from the flag, else a quarter of the cutoff, else twice the extent.
fn outer_radius(cfg: &RunConfig, surface: &Surface, c: &DVector<f64>) -> Result<f64> {
    match (cfg.r_max, surface.cutoff) {
        (Some(r), _) if r > 0.0 => Ok(r),
        (Some(r), _) => Err(Error::InvalidParameter(format!("r-max must be positive, got {r}"))),
        (None, Some(rc)) if !surface.is_compact() => Ok(rc / 4.0),
        _ => Ok(2.0 * extent(surface, c)?),
    }
}

fn radii(cfg: &RunConfig, r_max: f64) -> Result<Vec<f64>> {
    if cfg.n_radii < 6 {
        return Err(Error::InvalidParameter("n-radii must be at least 6".into()));
    }
    Ok(geometric_radii(r_max / 100.0, r_max, cfg.n_radii))
}

// ---------------------------------------------------------------- analyze

#[derive(Debug, Serialize)]
struct MonotonicityRow {
    sigma: f64,
    rho: f64,
    lhs: f64,
    lhs_error: f64,
    residual: f64,
    error: f64,
}

#[derive(Debug, Serialize)]
struct InequalityCsvRow {
    sigma: f64,
    rho: f64,
    delta: f64,
    lhs: f64,
    rhs: f64,
    slack: f64,
    error: f64,
}

#[derive(Debug, Serialize)]
struct SurfaceAnalysis<'a> {
    surface: &'a str,
    params: &'a std::collections::BTreeMap<String, f64>,
    center: Vec<f64>,
    density_profile: &'a [DensityRow],
    extrapolation: Option<&'a Extrapolation>,
    curvature: &'a TotalCurvature,
    monotonicity: &'a [MonotonicityLedger],
    radial_deviation: &'a RadialDeviation,
}

#[derive(Debug, Serialize)]
struct MeshAnalysis<'a> {
    mesh: String,
    center: Vec<f64>,
    density_profile: &'a [DensityRow],
    summary: &'a [SummaryRow],
    topology: &'a EulerGenus,
}

pub fn analyze(cfg: &RunConfig, out: &mut Written) -> Result<String> {
    match load_input(cfg)? {
        Input::Surface(s) => analyze_surface(cfg, &s, out),
        Input::Mesh(m) => analyze_mesh(cfg, &m, out),
    }
}

fn analyze_surface(cfg: &RunConfig, s: &Surface, out: &mut Written) -> Result<String> {
    let opts = QuadOptions::default();
    let c = center(cfg, s.ambient_dim())?;
    let r_max = outer_radius(cfg, s, &c)?;
    let rows = density_rows(s, &c, &radii(cfg, r_max)?, &opts)?;
    let extrapolation = if s.is_compact() {
        None
    } else {
        Some(extrapolate_infinity(&rows)?)
    };
    let curvature = total_curvature(s, None, &opts.clone().truncating())?;
    let pairs = [
        (r_max / 100.0, r_max / 10.0),
        (r_max / 10.0, r_max / 2.0),
        (r_max / 4.0, r_max),
    ];
    let ledgers = pairs
        .iter()
        .map(|&(a, b)| monotonicity_check(s, &c, a, b, &DEFAULT_DELTAS, &opts))
        .collect::<Result<Vec<_>>>()?;
    let last_decade = rows.iter().filter(|r| r.radius >= r_max / 10.0 * (1.0 - 1e-12));
    let theta_lower = if s.is_compact() {
        0.0
    } else {
        last_decade.map(|r| r.theta).fold(f64::INFINITY, f64::min)
    };
    let radial = radial_deviation_energy(s, &c, r_max, theta_lower, &opts)?;

    let mut summary = Vec::new();
    match &extrapolation {
        Some(e) => summary.push(row("theta_infinity", e.value, e.uncertainty)),
        None => summary.push(row("theta_infinity", 0.0, 0.0)),
    }
    summary.extend([
        row("willmore", curvature.willmore, curvature.willmore_error),
        row("total_curvature", curvature.value, curvature.error),
        row("gauss_curvature_integral", curvature.gauss, curvature.gauss_error),
        row("radial_deviation_energy", radial.energy, radial.energy_error),
        row("density_bound_slack", radial.slack, radial.error),
    ]);
    for l in &ledgers {
        summary.push(row(
            &format!("monotonicity_residual[{},{}]", l.sigma, l.rho),
            l.residual,
            l.error,
        ));
    }

    match cfg.format_or(Format::Csv) {
        Format::Csv => {
            out.csv(cfg.out_path("density_profile.csv"), &rows)?;
            out.csv(cfg.out_path("summary.csv"), &summary)?;
            let mono: Vec<MonotonicityRow> = ledgers
                .iter()
                .map(|l| MonotonicityRow {
                    sigma: l.sigma,
                    rho: l.rho,
                    lhs: l.lhs.value,
                    lhs_error: l.lhs.error,
                    residual: l.residual,
                    error: l.error,
                })
                .collect();
            out.csv(cfg.out_path("monotonicity.csv"), &mono)?;
            let ineq: Vec<InequalityCsvRow> = ledgers
                .iter()
                .flat_map(|l| {
                    l.inequality.iter().map(|q| InequalityCsvRow {
                        sigma: l.sigma,
                        rho: l.rho,
                        delta: q.delta,
                        lhs: q.lhs,
                        rhs: q.rhs,
                        slack: q.slack,
                        error: q.error,
                    })
                })
                .collect();
            out.csv(cfg.out_path("monotonicity_inequality.csv"), &ineq)?;
        }
        Format::Json => out.json(
            cfg.out_path("analyze.json"),
            &SurfaceAnalysis {
                surface: &s.name,
                params: &s.params,
                center: c.iter().copied().collect(),
                density_profile: &rows,
                extrapolation: extrapolation.as_ref(),
                curvature: &curvature,
                monotonicity: &ledgers,
                radial_deviation: &radial,
            },
        )?,
    }
    let last = rows.last().expect("schedule is non-empty");
    Ok(format!(
        "{}: Theta({}) = {:.6}, Theta(inf) = {}, willmore = {:.6}",
        s.name,
        last.radius,
        last.theta,
        extrapolation.map_or("0 (compact)".to_string(), |e| format!(
            "{:.6} +- {:.1e}",
            e.value, e.uncertainty
        )),
        curvature.willmore
    ))
}

/// Area ratio of the faces whose centroid lies in each ball; faces crossing
/// the sphere bound the error.
fn mesh_density_rows(m: &TriMesh, c: &DVector<f64>, radii: &[f64]) -> Vec<DensityRow> {
    radii
        .iter()
        .map(|&r| {
            let (mut inside, mut straddle) = (0.0, 0.0);
            for (i, f) in m.faces.iter().enumerate() {
                let a = m.face_area(i);
                if (m.face_centroid(i) - c).norm() < r {
                    inside += a;
                }
                let ds = f.map(|v| (&m.vertices[v] - c).norm());
                if ds.iter().any(|&d| d < r) && ds.iter().any(|&d| d >= r) {
                    straddle += a;
                }
            }
            let s = PI * r * r;
            DensityRow {
                radius: r,
                theta: inside / s,
                error: straddle / s,
            }
        })
        .collect()
}

fn analyze_mesh(cfg: &RunConfig, m: &TriMesh, out: &mut Written) -> Result<String> {
    let c = center(cfg, m.dim())?;
    let r_max = match cfg.r_max {
        Some(r) => r,
        None => 2.0 * m.vertices.iter().map(|v| (v - &c).norm()).fold(0.0, f64::max),
    };
    let rows = mesh_density_rows(m, &c, &radii(cfg, r_max)?);
    let topo = euler_genus(m, true)?;
    let (w, w_err) = mesh_willmore_estimate(m);
    let summary = vec![
        row("willmore", w, w_err),
        row("area", m.area(), 0.0),
        row("euler_characteristic", topo.euler_characteristic as f64, 0.0),
        row("boundary_loops", topo.boundary_loops as f64, 0.0),
        row("genus", topo.genus.map_or(f64::NAN, |g| g as f64), 0.0),
    ];
    let name = cfg.mesh.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
    match cfg.format_or(Format::Csv) {
        Format::Csv => {
            out.csv(cfg.out_path("density_profile.csv"), &rows)?;
            out.csv(cfg.out_path("summary.csv"), &summary)?;
        }
        Format::Json => out.json(
            cfg.out_path("analyze.json"),
            &MeshAnalysis {
                mesh: name.clone(),
                center: c.iter().copied().collect(),
                density_profile: &rows,
                summary: &summary,
                topology: &topo,
            },
        )?,
    }
    Ok(format!(
        "{name}: willmore = {w:.6} +- {w_err:.1e}, chi = {}, genus = {:?}",
        topo.euler_characteristic, topo.genus
    ))
}

// ---------------------------------------------------------------- invert

#[derive(Debug, Serialize)]
struct AntisymmetryCsvRow {
    chart: usize,
    u: f64,
    v: f64,
    left: f64,
    right: f64,
    relative_residual: f64,
}

#[derive(Debug, Serialize)]
struct InversionReport {
    surface: String,
    base_point: Vec<f64>,
    antisymmetry_max_residual: f64,
    antisymmetry_rows: Vec<AntisymmetryCsvRow>,
    inverted_sphere_fit: SphereFit,
    theta_infinity: Option<Extrapolation>,
    density_formula: Option<DensityFormulaReport>,
    density_identity: Option<DensityIdentityReport>,
}

pub fn invert_cmd(cfg: &RunConfig, out: &mut Written) -> Result<String> {
    let s = need_surface(load_input(cfg)?, "invert")?;
    let base = cfg
        .base
        .as_deref()
        .ok_or_else(|| Error::InvalidParameter("invert needs --base".into()))?;
    let x0 = parse_point(base, s.ambient_dim())?;
    let opts = QuadOptions::default();

    let mut anti = Vec::new();
    let mut max_residual: f64 = 0.0;
    for (k, chart) in s.charts.iter().enumerate() {
        let params = sample_params(chart.domain(), cfg.samples, cfg.seed.wrapping_add(k as u64));
        let l = antisymmetry_check(chart, &x0, &params)?;
        max_residual = max_residual.max(l.max_residual);
        anti.extend(l.rows.into_iter().map(|r: AntisymmetryRow| AntisymmetryCsvRow {
            chart: k,
            u: r.u,
            v: r.v,
            left: r.left,
            right: r.right,
            relative_residual: r.relative_residual,
        }));
    }
    let inv = invert(s.charts[0].clone(), &x0, None)?;
    let fit_params = sample_params(s.charts[0].domain(), cfg.samples.max(8), cfg.seed.wrapping_add(1 << 32));
    let sphere = fit_sphere(&inverted_points(&inv, &fit_params))?;

    let (theta, formula, identity) = if s.is_compact() {
        (None, None, None)
    } else {
        let origin = DVector::zeros(s.ambient_dim());
        let r_max = outer_radius(cfg, &s, &origin)?;
        let rows = density_rows(&s, &origin, &radii(cfg, r_max)?, &opts)?;
        let t = extrapolate_infinity(&rows)?;
        let formula = density_formula_check(&s, &x0, (t.value, t.uncertainty), 0.0, &opts)?;
        let identity = density_identity_check(&s, &x0, (t.value, t.uncertainty), cfg.sigma0, &opts)?;
        (Some(t), Some(formula), Some(identity))
    };

    let report = InversionReport {
        surface: s.name.clone(),
        base_point: x0.iter().copied().collect(),
        antisymmetry_max_residual: max_residual,
        antisymmetry_rows: anti,
        inverted_sphere_fit: sphere,
        theta_infinity: theta,
        density_formula: formula,
        density_identity: identity,
    };
    match cfg.format_or(Format::Csv) {
        Format::Csv => {
            out.csv(cfg.out_path("antisymmetry.csv"), &report.antisymmetry_rows)?;
            let mut summary = vec![
                row("antisymmetry_max_residual", report.antisymmetry_max_residual, 0.0),
                row(
                    "inverted_sphere_fit_radius",
                    report.inverted_sphere_fit.radius,
                    report.inverted_sphere_fit.residual,
                ),
                row("inverted_sphere_fit_residual", report.inverted_sphere_fit.residual, 0.0),
            ];
            if let Some(t) = &report.theta_infinity {
                summary.push(row("theta_infinity", t.value, t.uncertainty));
            }
            if let Some(f) = &report.density_formula {
                summary.extend([
                    row("density_formula_lhs", f.lhs, f.lhs_error + f.truncation),
                    row("density_formula_rhs", f.rhs, f.rhs_error),
                    row("density_formula_residual", f.residual, f.tolerance),
                    row("inverted_willmore", f.inverted_willmore, f.inverted_willmore_error),
                    row(
                        "willmore_bound_slack",
                        f.willmore_bound_slack,
                        320.0 * f.inverted_willmore_error,
                    ),
                ]);
            }
            if let Some(d) = &report.density_identity {
                summary.extend([
                    row(
                        "inverted_density_at_base",
                        d.inverted_density.value,
                        d.inverted_density.uncertainty,
                    ),
                    row("density_identity_residual", d.residual, d.tolerance),
                ]);
            }
            out.csv(cfg.out_path("inversion_summary.csv"), &summary)?;
        }
        Format::Json => out.json(cfg.out_path("invert.json"), &report)?,
    }
    let mut msg = format!(
        "{}: antisymmetry residual {:.2e}",
        s.name, report.antisymmetry_max_residual
    );
    if let Some(d) = &report.density_identity {
        msg += &format!(", density identity residual {:.2e}", d.residual);
    }
    Ok(msg)
}

// ---------------------------------------------------------------- flatness

/// Mesh vertex with the largest last coordinate (the north pole of a sphere).
fn pole(s: &Surface) -> Result<DVector<f64>> {
    let mut best: Option<DVector<f64>> = None;
    for chart in &s.charts {
        let (gu, gv) = chart.domain().grid;
        let m = sample_mesh(chart.as_ref(), (gu + 1, gv + 1))?;
        let n = m.dim() - 1;
        for v in m.vertices {
            if best.as_ref().is_none_or(|b| v[n] > b[n]) {
                best = Some(v);
            }
        }
    }
    best.ok_or_else(|| Error::InvalidParameter("surface has no charts".into()))
}

pub fn flatness_cmd(cfg: &RunConfig, out: &mut Written) -> Result<String> {
    let s = need_surface(load_input(cfg)?, "flatness")?;
    let dim = s.ambient_dim();
    let centers: Vec<DVector<f64>> = cfg
        .xi
        .as_deref()
        .unwrap_or("pole")
        .split(';')
        .map(|p| {
            if p.trim() == "pole" {
                pole(&s)
            } else {
                parse_point(p, dim)
            }
        })
        .collect::<Result<_>>()?;
    let scales = parse_list(
        cfg.scales
            .as_deref()
            .ok_or_else(|| Error::InvalidParameter("flatness needs --scales".into()))?,
    )?;
    let ratio = cfg.spacing_ratio.unwrap_or(DEFAULT_SPACING_RATIO);
    let reports: Vec<FlatnessReport> = reifenberg_scan(&s, &centers, &scales, ratio)?;
    match cfg.format_or(Format::Csv) {
        Format::Csv => {
            let path = cfg.out_path("flatness.csv");
            write_flatness_csv(&reports, std::fs::File::create(&path)?)?;
            out.0.push(path);
        }
        Format::Json => out.json(cfg.out_path("flatness.json"), &reports)?,
    }
    let eps: Vec<String> = reports
        .iter()
        .map(|r| format!("{:.4}", r.reifenberg_two_sided))
        .collect();
    Ok(format!("{}: eps = [{}]", s.name, eps.join(", ")))
}

// ---------------------------------------------------------------- ends

#[derive(Debug, Serialize)]
struct MeshEnds {
    mesh: String,
    e: usize,
    decomposition: EndDecomposition,
    topology: EulerGenus,
}

pub fn ends_cmd(cfg: &RunConfig, out: &mut Written) -> Result<String> {
    match load_input(cfg)? {
        Input::Surface(s) => ends_surface(cfg, &s, out),
        Input::Mesh(m) => ends_mesh(cfg, m, out),
    }
}

fn ends_surface(cfg: &RunConfig, s: &Surface, out: &mut Written) -> Result<String> {
    let mut opts = VerdictOptions {
        refine: cfg.refine,
        tolerance: cfg.tolerance,
        ..VerdictOptions::default()
    };
    if let Some(r) = cfg.r_max {
        opts.density_radii = Some(radii(cfg, r)?);
        opts.end_radii = Some(geometric_radii(r / 10.0, r, 4));
    }
    let r: FiniteTopologyReport = finite_topology_verdict(s, &opts)?;
    match cfg.format_or(Format::Json) {
        Format::Json => out.json(cfg.out_path("ends.json"), &r)?,
        Format::Csv => {
            out.csv(cfg.out_path("end_counts.csv"), &r.end_counts)?;
            out.csv(cfg.out_path("per_end.csv"), &r.per_end)?;
            let mut summary = vec![
                row("e", r.e as f64, 0.0),
                row("theta_infinity", r.theta_inf, r.theta_inf_error),
                row("hypothesis_gap", r.hypothesis_gap, r.hypothesis_margin),
                row("hypothesis_holds", f64::from(u8::from(r.hypothesis_holds)), 0.0),
            ];
            if let Some(g) = &r.ilmanen.global {
                summary.push(row("ilmanen_global_slack", g.slack, g.error));
            }
            if let Some(l) = &r.ilmanen.local {
                summary.push(row("ilmanen_local_slack", l.slack, l.error));
            }
            out.csv(cfg.out_path("ends_summary.csv"), &summary)?;
        }
    }
    Ok(format!(
        "{}: e = {}, Theta(inf) = {:.4}, hypothesis {}",
        s.name,
        r.e,
        r.theta_inf,
        if r.hypothesis_holds { "holds" } else { "fails" }
    ))
}

fn ends_mesh(cfg: &RunConfig, m: TriMesh, out: &mut Written) -> Result<String> {
    let c = center(cfg, m.dim())?;
    let topology = euler_genus(&m, true)?;
    let r_max = match cfg.r_max {
        Some(r) => r,
        None => 0.25 * m.vertices.iter().map(|v| (v - &c).norm()).fold(0.0, f64::max),
    };
    let d = count_ends(&SurfaceMesh::from_mesh(m), &c, &geometric_radii(r_max / 10.0, r_max, 4))?;
    let name = cfg.mesh.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
    let e = d.ends;
    match cfg.format_or(Format::Json) {
        Format::Json => out.json(
            cfg.out_path("ends.json"),
            &MeshEnds {
                mesh: name.clone(),
                e,
                decomposition: d,
                topology,
            },
        )?,
        Format::Csv => {
            out.csv(cfg.out_path("end_counts.csv"), &d.counts)?;
            out.csv(cfg.out_path("per_end.csv"), &d.per_end)?;
        }
    }
    Ok(format!("{name}: e = {e}"))
}
