//! Scenario configuration: a line-based `key = value` format with `#`
//! comments. Parsing validates everything it can and reports *all*
//! problems, each with its line number.
//!
//! ```text
//! schema_version = 1
//! kind = flow_run          # flow_run | jacobi_probe | catalog_verify
//!                          # | bump_experiment | sweep
//! family = s2xs1           # parabolic_helicoid | vertical_cylinder |
//!                          # slice | s2xs1 | s1xr2 | s2xs2 | h2xh2 |
//!                          # space_form
//! b = 1.0
//! t_max = 10.0
//! rtol = 1e-12
//! atol = 1e-14
//! out_prefix = run
//! seed = 42
//! ```
//!
//! Family parameters: `kappa`, `tau`, `mean_curvature` (parabolic
//! helicoid); `kappa`, `tau`, `k_g` (vertical cylinder); `b`; `phi_a`;
//! `s`; `c` and `lambdas = l1,l2,...` (space form). Bump experiment
//! keys: `bump_x`, `bump_y`, `bump_height`, `bump_sigma`, `circle_x`,
//! `circle_y`, `circle_radius`, `vertices`, `diag_dt`, `dt_factor`,
//! `dev_threshold_factor`. Sweeps: `sweep_param`, `sweep_values =
//! v1,v2,...`, `sweep_kind` (the children's kind, default `flow_run`).

use paraflow_core::ambient::AmbientSpec;
use paraflow_core::catalog::{
    ektau_parabolic_helicoid, ektau_vertical_cylinder, h2h2_family, s2r2_family, s2s2_family,
    space_form_family, CatalogError, FamilySolution, S2R2Case,
};
use paraflow_core::csf::{BumpParams, ExperimentParams};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub line: usize,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}: {}", self.line, self.field, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    FlowRun,
    JacobiProbe,
    CatalogVerify,
    BumpExperiment,
    Sweep,
}

impl ScenarioKind {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "flow_run" => Some(Self::FlowRun),
            "jacobi_probe" => Some(Self::JacobiProbe),
            "catalog_verify" => Some(Self::CatalogVerify),
            "bump_experiment" => Some(Self::BumpExperiment),
            "sweep" => Some(Self::Sweep),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::FlowRun => "flow_run",
            Self::JacobiProbe => "jacobi_probe",
            Self::CatalogVerify => "catalog_verify",
            Self::BumpExperiment => "bump_experiment",
            Self::Sweep => "sweep",
        }
    }
}

/// Family selection plus parameters, buildable into a
/// [`FamilySolution`].
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyConfig {
    ParabolicHelicoid { kappa: f64, tau: f64, mean_curvature: f64 },
    VerticalCylinder { kappa: f64, tau: f64, k_g: f64 },
    Slice,
    S2xS1 { b: f64 },
    S1xR2 { phi_a: f64 },
    S2xS2 { s: f64 },
    H2xH2 { s: f64 },
    SpaceForm { c: f64, lambdas: Vec<f64> },
}

impl FamilyConfig {
    pub fn build(&self) -> Result<FamilySolution, CatalogError> {
        match self {
            Self::ParabolicHelicoid { kappa, tau, mean_curvature } => {
                ektau_parabolic_helicoid(*kappa, *tau, *mean_curvature)
            }
            Self::VerticalCylinder { kappa, tau, k_g } => {
                ektau_vertical_cylinder(*kappa, *tau, *k_g)
            }
            Self::Slice => s2r2_family(S2R2Case::Slice),
            Self::S2xS1 { b } => s2r2_family(S2R2Case::S2xS1 { b: *b }),
            Self::S1xR2 { phi_a } => s2r2_family(S2R2Case::S1xR2 { phi_a: *phi_a }),
            Self::S2xS2 { s } => s2s2_family(*s),
            Self::H2xH2 { s } => h2h2_family(*s),
            Self::SpaceForm { c, lambdas } => Ok(space_form_family(*c, lambdas)),
        }
    }

    pub fn ambient(&self) -> AmbientSpec {
        match self {
            Self::ParabolicHelicoid { kappa, tau, .. }
            | Self::VerticalCylinder { kappa, tau, .. } => {
                AmbientSpec::EkTau { kappa: *kappa, tau: *tau }
            }
            Self::Slice | Self::S2xS1 { .. } | Self::S1xR2 { .. } => AmbientSpec::S2xR2,
            Self::S2xS2 { s } => AmbientSpec::S2xS2 { s: *s },
            Self::H2xH2 { s } => AmbientSpec::H2xH2 { s: *s },
            Self::SpaceForm { c, lambdas } => {
                AmbientSpec::SpaceForm { c: *c, n: lambdas.len() }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::ParabolicHelicoid { .. } => "parabolic_helicoid",
            Self::VerticalCylinder { .. } => "vertical_cylinder",
            Self::Slice => "slice",
            Self::S2xS1 { .. } => "s2xs1",
            Self::S1xR2 { .. } => "s1xr2",
            Self::S2xS2 { .. } => "s2xs2",
            Self::H2xH2 { .. } => "h2xh2",
            Self::SpaceForm { .. } => "space_form",
        }
    }

    /// Replaces one named parameter (used by sweep expansion).
    fn with_param(&self, key: &str, value: f64) -> Option<Self> {
        let mut out = self.clone();
        match (&mut out, key) {
            (Self::ParabolicHelicoid { kappa, .. }, "kappa") => *kappa = value,
            (Self::ParabolicHelicoid { tau, .. }, "tau") => *tau = value,
            (Self::ParabolicHelicoid { mean_curvature, .. }, "mean_curvature") => {
                *mean_curvature = value
            }
            (Self::VerticalCylinder { kappa, .. }, "kappa") => *kappa = value,
            (Self::VerticalCylinder { tau, .. }, "tau") => *tau = value,
            (Self::VerticalCylinder { k_g, .. }, "k_g") => *k_g = value,
            (Self::S2xS1 { b }, "b") => *b = value,
            (Self::S1xR2 { phi_a }, "phi_a") => *phi_a = value,
            (Self::S2xS2 { s }, "s") => *s = value,
            (Self::H2xH2 { s }, "s") => *s = value,
            (Self::SpaceForm { c, .. }, "c") => *c = value,
            _ => return None,
        }
        Some(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Numerics {
    pub rtol: f64,
    pub atol: f64,
    pub t_max: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-14, t_max: 10.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BumpConfig {
    pub bump_center: [f64; 2],
    pub height: f64,
    pub sigma: f64,
    pub circle_center: [f64; 2],
    pub radius: f64,
    pub vertices: usize,
    pub diag_dt: f64,
    pub dt_factor: f64,
    pub dev_threshold_factor: f64,
}

impl Default for BumpConfig {
    fn default() -> Self {
        Self {
            bump_center: [0.5, 0.0],
            height: 1.0,
            sigma: 0.5,
            circle_center: [0.0, 0.0],
            radius: 2.0,
            vertices: 1024,
            diag_dt: 0.02,
            dt_factor: 0.01,
            dev_threshold_factor: 10.0,
        }
    }
}

impl BumpConfig {
    pub fn to_params(&self) -> Result<ExperimentParams, String> {
        let bump = BumpParams::new(self.bump_center, self.height, self.sigma)
            .map_err(|e| e.to_string())?;
        let mut p = ExperimentParams::new(bump, self.circle_center, self.radius, self.vertices);
        p.diag_dt = self.diag_dt;
        p.dt_factor = self.dt_factor;
        p.dev_threshold_factor = self.dev_threshold_factor;
        p.validate().map_err(|e| e.to_string())?;
        Ok(p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub param: String,
    pub values: Vec<f64>,
    pub child_kind: ScenarioKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub family: Option<FamilyConfig>,
    pub numerics: Numerics,
    pub bump: BumpConfig,
    pub sweep: Option<SweepConfig>,
    pub out_prefix: String,
    pub seed: Option<u64>,
}

impl Scenario {
    /// Expands a sweep into child scenarios (one per value); non-sweeps
    /// expand to themselves.
    pub fn expand(&self) -> Result<Vec<Scenario>, Vec<ConfigIssue>> {
        let sweep = match (&self.kind, &self.sweep) {
            (ScenarioKind::Sweep, Some(sw)) => sw,
            _ => return Ok(vec![self.clone()]),
        };
        let family = self.family.as_ref().ok_or_else(|| {
            vec![issue(0, "family", "sweep requires a base family")]
        })?;
        let mut out = Vec::new();
        let mut errs = Vec::new();
        for (i, &v) in sweep.values.iter().enumerate() {
            match family.with_param(&sweep.param, v) {
                Some(fam) => {
                    if let Err(e) = fam.build() {
                        errs.push(issue(
                            0,
                            &sweep.param,
                            &format!("sweep value {v} rejected: {e}"),
                        ));
                        continue;
                    }
                    out.push(Scenario {
                        kind: sweep.child_kind,
                        family: Some(fam),
                        numerics: self.numerics.clone(),
                        bump: self.bump.clone(),
                        sweep: None,
                        out_prefix: format!("{}_{i:03}", self.out_prefix),
                        seed: self.seed,
                    });
                }
                None => errs.push(issue(
                    0,
                    &sweep.param,
                    &format!("family {} has no parameter {}", family.name(), sweep.param),
                )),
            }
        }
        if errs.is_empty() {
            Ok(out)
        } else {
            Err(errs)
        }
    }
}

fn issue(line: usize, field: &str, message: &str) -> ConfigIssue {
    ConfigIssue { line, field: field.to_string(), message: message.to_string() }
}

struct RawConfig {
    entries: BTreeMap<String, (usize, String)>,
    issues: Vec<ConfigIssue>,
}

impl RawConfig {
    fn take(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.remove(key)
    }

    fn take_f64(&mut self, key: &str) -> Option<f64> {
        let (line, raw) = self.take(key)?;
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Some(v),
            _ => {
                self.issues.push(issue(line, key, &format!("not a finite number: {raw:?}")));
                None
            }
        }
    }

    fn take_usize(&mut self, key: &str) -> Option<usize> {
        let (line, raw) = self.take(key)?;
        match raw.parse::<usize>() {
            Ok(v) => Some(v),
            _ => {
                self.issues.push(issue(line, key, &format!("not a nonnegative integer: {raw:?}")));
                None
            }
        }
    }

    fn take_f64_list(&mut self, key: &str) -> Option<Vec<f64>> {
        let (line, raw) = self.take(key)?;
        let mut out = Vec::new();
        for part in raw.split(',') {
            match part.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => out.push(v),
                _ => {
                    self.issues.push(issue(line, key, &format!("bad list entry {part:?}")));
                    return None;
                }
            }
        }
        Some(out)
    }
}

/// Parses and validates a config, returning either a scenario or *all*
/// collected problems.
pub fn parse_config(text: &str) -> Result<Scenario, Vec<ConfigIssue>> {
    let mut entries = BTreeMap::new();
    let mut issues = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let stripped = match line.find('#') {
            Some(pos) => &line[..pos],
            None => line,
        }
        .trim();
        if stripped.is_empty() {
            continue;
        }
        match stripped.split_once('=') {
            Some((k, v)) => {
                let key = k.trim().to_string();
                if key.is_empty() {
                    issues.push(issue(lineno, "<line>", "missing key before '='"));
                    continue;
                }
                if entries.insert(key.clone(), (lineno, v.trim().to_string())).is_some() {
                    issues.push(issue(lineno, &key, "duplicate key"));
                }
            }
            None => issues.push(issue(lineno, "<line>", "expected 'key = value'")),
        }
    }
    let mut raw = RawConfig { entries, issues };

    // Schema version is mandatory.
    match raw.take("schema_version") {
        Some((line, v)) => {
            if v != "1" {
                raw.issues.push(issue(line, "schema_version", &format!("unsupported version {v}")));
            }
        }
        None => raw.issues.push(issue(0, "schema_version", "missing (expected 1)")),
    }

    let kind = match raw.take("kind") {
        Some((line, v)) => match ScenarioKind::parse(&v) {
            Some(k) => Some(k),
            None => {
                raw.issues.push(issue(
                    line,
                    "kind",
                    &format!(
                        "unknown kind {v:?} (expected flow_run, jacobi_probe, catalog_verify, \
                         bump_experiment or sweep)"
                    ),
                ));
                None
            }
        },
        None => {
            raw.issues.push(issue(0, "kind", "missing"));
            None
        }
    };

    let family = parse_family(&mut raw);

    let mut numerics = Numerics::default();
    if let Some(v) = raw.take_f64("rtol") {
        numerics.rtol = v;
    }
    if let Some(v) = raw.take_f64("atol") {
        numerics.atol = v;
    }
    if let Some(v) = raw.take_f64("t_max") {
        numerics.t_max = v;
    }
    if !(numerics.rtol > 0.0 && numerics.atol > 0.0) {
        raw.issues.push(issue(0, "rtol/atol", "tolerances must be positive"));
    }

    let mut bump = BumpConfig::default();
    if let Some(v) = raw.take_f64("bump_x") {
        bump.bump_center[0] = v;
    }
    if let Some(v) = raw.take_f64("bump_y") {
        bump.bump_center[1] = v;
    }
    if let Some(v) = raw.take_f64("bump_height") {
        bump.height = v;
    }
    if let Some(v) = raw.take_f64("bump_sigma") {
        bump.sigma = v;
    }
    if let Some(v) = raw.take_f64("circle_x") {
        bump.circle_center[0] = v;
    }
    if let Some(v) = raw.take_f64("circle_y") {
        bump.circle_center[1] = v;
    }
    if let Some(v) = raw.take_f64("circle_radius") {
        bump.radius = v;
    }
    if let Some(v) = raw.take_usize("vertices") {
        bump.vertices = v;
    }
    if let Some(v) = raw.take_f64("diag_dt") {
        bump.diag_dt = v;
    }
    if let Some(v) = raw.take_f64("dt_factor") {
        bump.dt_factor = v;
    }
    if let Some(v) = raw.take_f64("dev_threshold_factor") {
        bump.dev_threshold_factor = v;
    }

    let seed = raw.take("seed").and_then(|(line, v)| match v.parse::<u64>() {
        Ok(s) => Some(s),
        Err(_) => {
            raw.issues.push(issue(line, "seed", &format!("not a u64: {v:?}")));
            None
        }
    });

    let out_prefix = raw
        .take("out_prefix")
        .map(|(_, v)| v)
        .unwrap_or_else(|| "run".to_string());

    let sweep = parse_sweep(&mut raw);

    // Kind-specific requirements.
    if let Some(kind) = kind {
        match kind {
            ScenarioKind::FlowRun | ScenarioKind::JacobiProbe => {
                if family.is_none() {
                    raw.issues.push(issue(0, "family", "required for this kind"));
                }
            }
            ScenarioKind::BumpExperiment => {
                if let Err(e) = bump.to_params() {
                    raw.issues.push(issue(0, "bump", &e));
                }
            }
            ScenarioKind::Sweep => {
                if sweep.is_none() {
                    raw.issues
                        .push(issue(0, "sweep_param", "sweep requires sweep_param and sweep_values"));
                }
                if family.is_none() {
                    raw.issues.push(issue(0, "family", "sweep requires a base family"));
                }
            }
            ScenarioKind::CatalogVerify => {}
        }
    }

    // Validate the family parameters through the catalog constructors and
    // the ambient registry so every violation is reported.
    if let Some(fam) = &family {
        if let Err(e) = fam.build() {
            raw.issues.push(issue(0, fam.name(), &e.to_string()));
        }
        if let Err(errs) = fam.ambient().validate() {
            for e in errs {
                raw.issues.push(issue(0, fam.name(), &e));
            }
        }
    }

    for (key, (line, _)) in raw.entries.iter() {
        raw.issues.push(issue(*line, key, "unknown key"));
    }

    if raw.issues.is_empty() {
        Ok(Scenario {
            kind: kind.unwrap(),
            family,
            numerics,
            bump,
            sweep,
            out_prefix,
            seed,
        })
    } else {
        let mut issues = raw.issues;
        issues.sort_by_key(|i| i.line);
        Err(issues)
    }
}

fn parse_family(raw: &mut RawConfig) -> Option<FamilyConfig> {
    let (line, name) = raw.take("family")?;
    let missing = |raw: &mut RawConfig, key: &str| {
        raw.issues.push(issue(line, key, "required by this family"));
    };
    match name.as_str() {
        "parabolic_helicoid" => {
            let kappa = raw.take_f64("kappa");
            let tau = raw.take_f64("tau");
            let h = raw.take_f64("mean_curvature");
            if kappa.is_none() {
                missing(raw, "kappa");
            }
            if tau.is_none() {
                missing(raw, "tau");
            }
            if h.is_none() {
                missing(raw, "mean_curvature");
            }
            Some(FamilyConfig::ParabolicHelicoid {
                kappa: kappa?,
                tau: tau?,
                mean_curvature: h?,
            })
        }
        "vertical_cylinder" => {
            let kappa = raw.take_f64("kappa");
            let tau = raw.take_f64("tau");
            let kg = raw.take_f64("k_g");
            if kappa.is_none() {
                missing(raw, "kappa");
            }
            if tau.is_none() {
                missing(raw, "tau");
            }
            if kg.is_none() {
                missing(raw, "k_g");
            }
            Some(FamilyConfig::VerticalCylinder { kappa: kappa?, tau: tau?, k_g: kg? })
        }
        "slice" => Some(FamilyConfig::Slice),
        "s2xs1" => {
            let b = raw.take_f64("b");
            if b.is_none() {
                missing(raw, "b");
            }
            Some(FamilyConfig::S2xS1 { b: b? })
        }
        "s1xr2" => {
            let phi = raw.take_f64("phi_a");
            if phi.is_none() {
                missing(raw, "phi_a");
            }
            Some(FamilyConfig::S1xR2 { phi_a: phi? })
        }
        "s2xs2" => {
            let s = raw.take_f64("s");
            if s.is_none() {
                missing(raw, "s");
            }
            Some(FamilyConfig::S2xS2 { s: s? })
        }
        "h2xh2" => {
            let s = raw.take_f64("s");
            if s.is_none() {
                missing(raw, "s");
            }
            Some(FamilyConfig::H2xH2 { s: s? })
        }
        "space_form" => {
            let c = raw.take_f64("c");
            let lambdas = raw.take_f64_list("lambdas");
            if c.is_none() {
                missing(raw, "c");
            }
            if lambdas.is_none() {
                missing(raw, "lambdas");
            }
            Some(FamilyConfig::SpaceForm { c: c?, lambdas: lambdas? })
        }
        other => {
            raw.issues.push(issue(line, "family", &format!("unknown family {other:?}")));
            None
        }
    }
}

fn parse_sweep(raw: &mut RawConfig) -> Option<SweepConfig> {
    let param = raw.take("sweep_param");
    let values = raw.take_f64_list("sweep_values");
    let child_kind = match raw.take("sweep_kind") {
        Some((line, v)) => match ScenarioKind::parse(&v) {
            Some(ScenarioKind::Sweep) => {
                raw.issues.push(issue(line, "sweep_kind", "nested sweeps are not supported"));
                None
            }
            Some(k) => Some(k),
            None => {
                raw.issues.push(issue(line, "sweep_kind", &format!("unknown kind {v:?}")));
                None
            }
        },
        None => Some(ScenarioKind::FlowRun),
    };
    match (param, values) {
        (Some((_, param)), Some(values)) => {
            if values.is_empty() {
                raw.issues.push(issue(0, "sweep_values", "empty sweep"));
                return None;
            }
            Some(SweepConfig { param, values, child_kind: child_kind? })
        }
        _ => None,
    }
}
