//! Reproducible experiment runner: one subcommand per audit, each writing
//! comma-separated tables and a manifest into an output directory.

mod config;
mod table;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

pub use config::{
    DomainSection, ExperimentConfig, FamilySection, FrameSection, OperatorSection, OutputSection,
    SimulationSection,
};
pub use table::{compare_golden, golden_constant, num, Breach, GoldenReport, Table, Tolerances};

use crate::bumps::bump_family;
use crate::domain::{build_domain, Grid};
use crate::error::{LabError, Result};
use crate::hash::sha256_hex;
use crate::minimax::{
    audit_pairs, build_family, build_frame, end_to_end_lower_bound_demo, kl_joint, member_spectra,
    rate_exponent, scale_for_sample_size, separation_audit, theorem_b1_bound, vg_codes, FrameSpec,
    HypothesisFamily, PipelineSetup,
};
use crate::perturbation::{lemma31_ratio, pseudo_linearisation_residual, SpectralPair};
use crate::sim::{
    estimate_transition, histogram_vs_density, ks_critical_1pct, ks_uniform, log_log_slope,
    population_transition, risk_curve, simulate, true_transition, write_estimate, write_trajectory,
    RiskSetup, SimConfig,
};
use crate::spectral::{eigensolve, transition_density, weyl_audit, DiffusivityField, EigenSystem};
use crate::stability::{
    chain_rule_audit, cutoff_tail_profile, gradient_floor, l1_transport_bound, lipschitz_constant,
    stability_probe, FloorMode,
};

/// The audits exposed on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    Eigen,
    Weyl,
    Duhamel,
    Lemma31,
    Transport,
    Floor,
    Stability,
    Minimax,
    Kl,
    Simulate,
    Estimate,
    Rates,
}

impl Subcommand {
    pub const ALL: [Subcommand; 12] = [
        Subcommand::Eigen,
        Subcommand::Weyl,
        Subcommand::Duhamel,
        Subcommand::Lemma31,
        Subcommand::Transport,
        Subcommand::Floor,
        Subcommand::Stability,
        Subcommand::Minimax,
        Subcommand::Kl,
        Subcommand::Simulate,
        Subcommand::Estimate,
        Subcommand::Rates,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Eigen => "eigen",
            Subcommand::Weyl => "weyl",
            Subcommand::Duhamel => "duhamel",
            Subcommand::Lemma31 => "lemma31",
            Subcommand::Transport => "transport",
            Subcommand::Floor => "floor",
            Subcommand::Stability => "stability",
            Subcommand::Minimax => "minimax",
            Subcommand::Kl => "kl",
            Subcommand::Simulate => "simulate",
            Subcommand::Estimate => "estimate",
            Subcommand::Rates => "rates",
        }
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| LabError::Parse(format!("unknown subcommand `{s}`")))
    }
}

/// Command-line overrides of the configuration.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub golden: Option<PathBuf>,
}

/// What a run produced.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub tables: Vec<(String, Table)>,
    pub texts: Vec<(String, String)>,
    pub failed: Vec<String>,
}

impl Outcome {
    fn check(&mut self, name: &str, ok: bool) {
        if !ok {
            log::error!("invariant `{name}` failed");
            self.failed.push(name.to_string());
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    subcommand: &'a str,
    config_sha256: String,
    seed: u64,
    version: String,
    status: &'a str,
    failed_invariants: &'a [String],
    files: Vec<String>,
}

/// Writes through a temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| {
        LabError::Config(format!("output path {} has no file name", path.display()))
    })?;
    let tmp = dir.join(format!(".{}.tmp", name.to_string_lossy()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Runs a subcommand and writes its tables and manifest. Returns the outcome;
/// a non-empty `failed` list means the caller should exit nonzero.
pub fn run(
    sub: Subcommand,
    cfg: &ExperimentConfig,
    config_text: &str,
    opts: &RunOptions,
) -> Result<Outcome> {
    cfg.validate()?;
    let seed = opts.seed.unwrap_or(cfg.seed);
    let golden_path = opts
        .golden
        .clone()
        .or_else(|| cfg.output.golden_path.clone());
    let golden = golden_path.map(|p| Table::read(&p)).transpose()?;
    let out_dir = opts.out.clone().unwrap_or_else(|| cfg.output.dir.clone());
    let outcome = compute(sub, cfg, seed, golden.as_ref())?;

    let mut files = Vec::new();
    for (name, t) in &outcome.tables {
        let file = format!("{name}.csv");
        write_atomic(&out_dir.join(&file), &t.to_csv()?)?;
        files.push(file);
    }
    for (file, text) in &outcome.texts {
        write_atomic(&out_dir.join(file), text)?;
        files.push(file.clone());
    }
    let manifest = Manifest {
        subcommand: sub.name(),
        config_sha256: sha256_hex(config_text.as_bytes()),
        seed,
        version: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        status: if outcome.failed.is_empty() {
            "pass"
        } else {
            "fail"
        },
        failed_invariants: &outcome.failed,
        files,
    };
    let text = toml::to_string(&manifest).map_err(|e| LabError::Parse(e.to_string()))?;
    write_atomic(
        &out_dir.join(format!("{}.manifest.toml", sub.name())),
        &text,
    )?;
    Ok(outcome)
}

/// Computes the tables of a subcommand without touching the file system.
pub fn compute(
    sub: Subcommand,
    cfg: &ExperimentConfig,
    seed: u64,
    golden: Option<&Table>,
) -> Result<Outcome> {
    let ctx = Context::new(cfg, seed, golden)?;
    match sub {
        Subcommand::Eigen => ctx.eigen(),
        Subcommand::Weyl => ctx.weyl(),
        Subcommand::Duhamel => ctx.duhamel(),
        Subcommand::Lemma31 => ctx.lemma31(),
        Subcommand::Transport => ctx.transport(),
        Subcommand::Floor => ctx.floor(),
        Subcommand::Stability => ctx.stability(),
        Subcommand::Minimax => ctx.minimax(),
        Subcommand::Kl => ctx.kl(),
        Subcommand::Simulate => ctx.simulate(),
        Subcommand::Estimate => ctx.estimate(),
        Subcommand::Rates => ctx.rates(),
    }
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    seed: u64,
    golden: Option<&'a Table>,
    grid: Grid,
    f0: DiffusivityField,
    domain_name: &'static str,
}

impl<'a> Context<'a> {
    fn new(cfg: &'a ExperimentConfig, seed: u64, golden: Option<&'a Table>) -> Result<Self> {
        let kind = cfg.domain_kind()?;
        let d = &cfg.domain;
        let (_, grid) = build_domain(kind, &d.extents_length, d.resolution_cells, d.margin_length)?;
        let f0 = DiffusivityField::constant(&grid, 1.0)?;
        Ok(Context {
            cfg,
            seed,
            golden,
            grid,
            f0,
            domain_name: kind.name(),
        })
    }

    fn modes(&self) -> usize {
        match self.cfg.operator.modes_count {
            0 => self.grid.len(),
            j => j.min(self.grid.len()),
        }
    }

    fn full(&self, f: &DiffusivityField) -> Result<EigenSystem> {
        eigensolve(&self.grid, f, self.grid.len())
    }

    fn family(&self, sub: Subcommand) -> Result<&FamilySection> {
        self.cfg.section(&self.cfg.family, "family", sub.name())
    }

    fn golden(&self, quantity: &str) -> Result<Option<f64>> {
        match self.golden {
            Some(t) => golden_constant(t, quantity, self.domain_name),
            None => Ok(None),
        }
    }

    /// Records a within-factor-two comparison against a golden constant.
    fn golden_band(&self, out: &mut Outcome, name: &str, quantity: &str, value: f64) -> Result<()> {
        match self.golden(quantity)? {
            Some(g) => out.check(name, value >= 0.5 * g && value <= 2.0 * g),
            None => log::warn!(
                "no golden `{quantity}` for {}; skipping `{name}`",
                self.domain_name
            ),
        }
        Ok(())
    }

    fn eigen(&self) -> Result<Outcome> {
        let es = eigensolve(&self.grid, &self.f0, self.modes())?;
        let p = 2.0 / self.grid.dim() as f64;
        let mut t = Table::new(&["k", "lambda", "weyl_ratio", "multiplicity"]);
        for k in 0..es.count() {
            let ratio = if k == 0 {
                0.0
            } else {
                es.eigenvalue(k) / (k as f64).powf(p)
            };
            t.push(vec![
                k.to_string(),
                num(es.eigenvalue(k)),
                num(ratio),
                es.multiplicity(k).to_string(),
            ]);
        }
        let mut out = Outcome::default();
        out.check("eigen.orthonormality", es.gram_defect() <= 1e-8);
        out.check(
            "eigen.ordering",
            es.eigenvalues().windows(2).all(|w| w[0] <= w[1]),
        );
        out.tables.push(("eigen".into(), t));
        Ok(out)
    }

    fn weyl(&self) -> Result<Outcome> {
        let fam = self.family(Subcommand::Weyl)?;
        let count = self.modes().max(22).min(self.grid.len());
        let es1 = eigensolve(&self.grid, &self.f0, count)?;
        let max_k = 20.min(count - 1);
        let members = bump_family(
            &self.grid,
            &self.f0,
            2,
            fam.amplitude,
            self.cfg.operator.f_min,
            self.seed,
        )?;
        let reference = weyl_audit(&es1, self.grid.dim(), max_k)?;
        let mut out = Outcome::default();
        let mut t = Table::new(&["field", "k", "lambda", "ratio", "band_lo", "band_hi"]);
        for (k, lam, ratio) in &reference.rows {
            t.push(vec![
                "constant".into(),
                k.to_string(),
                num(*lam),
                num(*ratio),
                num(reference.min_ratio),
                num(reference.max_ratio),
            ]);
        }
        if let (Some(lo), Some(hi)) = (
            self.golden("weyl_ratio_min")?,
            self.golden("weyl_ratio_max")?,
        ) {
            out.check(
                "weyl.pinned_band",
                reference.min_ratio >= lo * (1.0 - 1e-9)
                    && reference.max_ratio <= hi * (1.0 + 1e-9),
            );
        }
        let mut inside = true;
        for m in &members {
            let es = eigensolve(&self.grid, &m.field, count)?;
            let rep = weyl_audit(&es, self.grid.dim(), max_k)?;
            let lo_f = m
                .field
                .values()
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            let hi_f = m.field.sup_norm();
            for ((k, lam, ratio), (_, _, r1)) in rep.rows.iter().zip(&reference.rows) {
                let (blo, bhi) = (lo_f * r1, hi_f * r1);
                inside &= *ratio >= blo * (1.0 - 1e-9) && *ratio <= bhi * (1.0 + 1e-9);
                t.push(vec![
                    format!("member{}", m.id),
                    k.to_string(),
                    num(*lam),
                    num(*ratio),
                    num(blo),
                    num(bhi),
                ]);
            }
        }
        out.check("weyl.rayleigh_band", inside);
        out.tables.push(("weyl".into(), t));
        Ok(out)
    }

    fn duhamel(&self) -> Result<Outcome> {
        let fam = self.family(Subcommand::Duhamel)?;
        let members = bump_family(
            &self.grid,
            &self.f0,
            fam.cases_count,
            fam.amplitude,
            self.cfg.operator.f_min,
            self.seed,
        )?;
        let es0 = self.full(&self.f0)?;
        let d0 = self.cfg.operator.d_time;
        let rows = members
            .par_iter()
            .enumerate()
            .map(|(i, m)| -> Result<Vec<String>> {
                let es = self.full(&m.field)?;
                let pair = SpectralPair::new(&self.grid, &m.field, &self.f0, &es, &es0)?;
                let d = d0 * [0.5, 1.0, 2.0][i % 3];
                let k = 1 + i % 3;
                let r = pseudo_linearisation_residual(&pair, d, k)?;
                Ok(vec![
                    i.to_string(),
                    num(d),
                    k.to_string(),
                    num(r.residual),
                    num(r.lhs_norm),
                    num(r.relative),
                ])
            })
            .collect::<Result<Vec<_>>>()?;
        let mut t = Table::new(&["case", "D", "k", "residual", "lhs_norm", "relative"]);
        rows.into_iter().for_each(|r| t.push(r));
        let mut out = Outcome::default();
        out.check(
            "duhamel.residual",
            t.numbers("relative").iter().all(|&r| r <= 1e-8),
        );
        out.tables.push(("duhamel".into(), t));
        Ok(out)
    }

    fn lemma31(&self) -> Result<Outcome> {
        let fam = self.family(Subcommand::Lemma31)?;
        let op = &self.cfg.operator;
        let members = bump_family(
            &self.grid,
            &self.f0,
            fam.members_count,
            fam.amplitude,
            op.f_min,
            self.seed,
        )?;
        let es0 = self.full(&self.f0)?;
        let rows = members
            .par_iter()
            .map(|m| -> Result<Vec<String>> {
                let es = self.full(&m.field)?;
                let pair = SpectralPair::new(&self.grid, &m.field, &self.f0, &es, &es0)?;
                let r = lemma31_ratio(&pair, op.d_time, op.kappa_count)?;
                Ok(vec![
                    m.id.to_string(),
                    num(r.opnorm),
                    num(r.max_transport),
                    r.argmax_k.to_string(),
                    num(r.ratio),
                ])
            })
            .collect::<Result<Vec<_>>>()?;
        let mut t = Table::new(&["member", "opnorm", "max_transport", "argmax_k", "ratio"]);
        rows.into_iter().for_each(|r| t.push(r));
        let min = t.numbers("ratio").into_iter().fold(f64::INFINITY, f64::min);
        let mut out = Outcome::default();
        out.check("lemma31.positive", min > 0.0 && min.is_finite());
        self.golden_band(&mut out, "lemma31.golden", "lemma31_min_ratio", min)?;
        let mut s = Table::new(&["quantity", "domain", "value"]);
        s.push(vec![
            "lemma31_min_ratio".into(),
            self.domain_name.into(),
            num(min),
        ]);
        out.tables.push(("lemma31".into(), t));
        out.tables.push(("lemma31_summary".into(), s));
        Ok(out)
    }

    fn transport(&self) -> Result<Outcome> {
        let fam = self.family(Subcommand::Transport)?;
        let op = &self.cfg.operator;
        let es0 = self.full(&self.f0)?;
        let mut out = Outcome::default();
        let pairs = bump_family(
            &self.grid,
            &self.f0,
            fam.pairs_count,
            fam.amplitude,
            op.f_min,
            self.seed,
        )?;
        let mut chain = Table::new(&["pair", "k", "evaluated", "excluded", "violations"]);
        let mut violations = 0;
        for (i, m) in pairs.iter().enumerate() {
            let h: Vec<f64> = m
                .field
                .values()
                .iter()
                .zip(self.f0.values())
                .map(|(a, b)| a - b)
                .collect();
            let k = 1 + i % op.kappa_count;
            let v = self.grid.gradient(es0.mode(k));
            let r = chain_rule_audit(&self.grid, &h, &v);
            violations += r.violations;
            chain.push(vec![
                i.to_string(),
                k.to_string(),
                r.evaluated.to_string(),
                r.excluded.to_string(),
                r.violations.to_string(),
            ]);
        }
        out.check("transport.chain_rule", violations == 0);
        let cert = gradient_floor(&self.grid, &es0, FloorMode::Empirical)?;
        let members = bump_family(
            &self.grid,
            &self.f0,
            fam.members_count,
            fam.amplitude,
            op.f_min,
            self.seed ^ 0x5eed,
        )?;
        let mut bound = Table::new(&["member", "lhs", "rhs", "holds"]);
        let mut all = true;
        for m in &members {
            let h = m.field.field().sub(self.f0.field())?;
            let b = l1_transport_bound(&self.grid, &h, &es0, &cert)?;
            all &= b.holds();
            bound.push(vec![
                m.id.to_string(),
                num(b.lhs),
                num(b.rhs),
                b.holds().to_string(),
            ]);
        }
        out.check("transport.l1_bound", all);
        out.tables.push(("transport".into(), chain));
        out.tables.push(("transport_l1".into(), bound));
        Ok(out)
    }

    fn floor(&self) -> Result<Outcome> {
        let es0 = self.full(&self.f0)?;
        let mut out = Outcome::default();
        let mut t = Table::new(&["mode", "kappa", "floor", "attained", "tail_c1"]);
        let mut kappas = [None, None];
        for (slot, mode, name) in [
            (0, FloorMode::Empirical, "empirical"),
            (1, FloorMode::Constructive, "constructive"),
        ] {
            match gradient_floor(&self.grid, &es0, mode) {
                Ok(c) => {
                    out.check(
                        &format!("floor.{name}.validate"),
                        c.validate(&self.grid, &es0).is_ok(),
                    );
                    let tail = c.witness.as_ref().map_or(String::new(), |w| num(w.tail_c1));
                    if let Some(w) = &c.witness {
                        out.check("floor.constructive.tail", w.tail_c1 <= 0.5);
                    }
                    t.push(vec![
                        name.into(),
                        c.kappa.to_string(),
                        num(c.floor),
                        num(c.attained),
                        tail,
                    ]);
                    kappas[slot] = Some(c.kappa);
                }
                Err(e) => {
                    log::error!("{name} floor certificate: {e}");
                    out.check(&format!("floor.{name}"), false);
                }
            }
        }
        if let [Some(a), Some(b)] = kappas {
            out.check("floor.ordering", b >= a);
        }
        let max_kappa = kappas[1].unwrap_or(self.grid.len() / 4).max(1);
        let (_, profile) = cutoff_tail_profile(&self.grid, &es0, max_kappa)?;
        let mut p = Table::new(&["kappa", "tail_c1"]);
        for (i, v) in profile.iter().enumerate() {
            p.push(vec![(i + 1).to_string(), num(*v)]);
        }
        out.tables.push(("floor".into(), t));
        out.tables.push(("floor_profile".into(), p));
        Ok(out)
    }

    fn stability(&self) -> Result<Outcome> {
        let fam = self.family(Subcommand::Stability)?;
        let op = &self.cfg.operator;
        let es0 = self.full(&self.f0)?;
        let cert = gradient_floor(&self.grid, &es0, FloorMode::Empirical)?;
        let mut t = Table::new(&[
            "member",
            "amplitude",
            "l1_distance",
            "opnorm",
            "ratio",
            "lower_bound_ratio",
            "transport_lhs",
            "transport_rhs",
        ]);
        let mut out = Outcome::default();
        let mut lips = Vec::new();
        let mut transport_ok = true;
        for amplitude in [fam.amplitude, 0.5 * fam.amplitude] {
            let members = bump_family(
                &self.grid,
                &self.f0,
                fam.probe_members_count,
                amplitude,
                op.f_min,
                self.seed,
            )?;
            let rows = stability_probe(
                &self.grid, &self.f0, &es0, &members, amplitude, op.d_time, &cert,
            )?;
            for r in &rows {
                transport_ok &= r.transport.holds();
                t.push(vec![
                    r.member.to_string(),
                    num(r.amplitude),
                    num(r.l1_distance),
                    num(r.opnorm),
                    num(r.ratio),
                    num(r.lower_bound_ratio),
                    num(r.transport.lhs),
                    num(r.transport.rhs),
                ]);
            }
            lips.push(lipschitz_constant(&rows));
        }
        out.check(
            "stability.finite",
            lips.iter().all(|l| l.is_finite() && *l > 0.0),
        );
        out.check("stability.halving", (lips[1] / lips[0] - 1.0).abs() <= 0.5);
        out.check("stability.transport", transport_ok);
        self.golden_band(&mut out, "stability.golden", "lipschitz_constant", lips[0])?;
        let mut s = Table::new(&["quantity", "domain", "value"]);
        s.push(vec![
            "lipschitz_constant".into(),
            self.domain_name.into(),
            num(lips[0]),
        ]);
        s.push(vec![
            "lipschitz_constant_half_amplitude".into(),
            self.domain_name.into(),
            num(lips[1]),
        ]);
        out.tables.push(("stability".into(), t));
        out.tables.push(("stability_summary".into(), s));
        Ok(out)
    }

    fn hypothesis_family(&self, fr: &FrameSection, j: u32) -> Result<HypothesisFamily> {
        let frame = build_frame(
            &self.grid,
            FrameSpec {
                j,
                center: fr.center_length,
                radius: fr.radius_length,
                anisotropy_c: fr.anisotropy_c,
                multiplier: fr.multiplier,
            },
        )?;
        let codes = vg_codes(frame.len(), 0.25, self.seed)?;
        build_family(
            &self.grid,
            frame,
            codes,
            fr.eta,
            self.cfg.operator.s_smoothness,
            self.cfg.operator.f_min,
            self.seed,
        )
    }

    fn minimax(&self) -> Result<Outcome> {
        let fr = self.cfg.section(&self.cfg.frame, "frame", "minimax")?;
        let op = &self.cfg.operator;
        let reference = self.full(&self.f0)?;
        let mut out = Outcome::default();
        let mut t = Table::new(&[
            "j",
            "m",
            "m_prime",
            "i_term",
            "ii_term",
            "ii_over_i",
            "d1_scaled",
            "opnorm_scaled",
            "max_transport",
        ]);
        for &j in &fr.j_scales {
            let fam = self.hypothesis_family(fr, j)?;
            let spectra = member_spectra(&self.grid, &fam)?;
            let mut pairs = audit_pairs(fam.members.len(), fr.pairs_count, self.seed);
            pairs.truncate(fr.pairs_count);
            let rows = separation_audit(&self.grid, &fam, &spectra, &reference, op.d_time, &pairs)?;
            for r in &rows {
                t.push(vec![
                    j.to_string(),
                    r.m.to_string(),
                    r.m_prime.to_string(),
                    num(r.i_term),
                    num(r.ii_term),
                    num(r.ii_over_i()),
                    num(r.d1_scaled),
                    num(r.opnorm_scaled),
                    num(r.max_transport),
                ]);
            }
            out.texts.push((format!("family_j{j}.txt"), fam.manifest()));
        }
        let spread = |v: Vec<f64>| {
            let hi = v.iter().copied().fold(0.0, f64::max);
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            hi / lo
        };
        out.check(
            "minimax.ii_over_i",
            t.numbers("ii_over_i").iter().all(|&r| r <= 0.5),
        );
        out.check("minimax.d1_scaling", spread(t.numbers("d1_scaled")) <= 4.0);
        out.check(
            "minimax.opnorm_scaling",
            spread(t.numbers("opnorm_scaled")) <= 4.0,
        );
        out.tables.push(("minimax".into(), t));
        if !fr.pipeline_n_list.is_empty() {
            let setup = PipelineSetup {
                frame_center: fr.center_length,
                frame_radius: fr.radius_length,
                anisotropy_c: fr.anisotropy_c,
                multiplier: fr.multiplier,
                s: op.s_smoothness,
                d_time: op.d_time,
                f_min: op.f_min,
                eta: fr.eta,
                alpha_target: 0.1,
                convention: self.cfg.kl_convention()?,
                seed: self.seed,
            };
            let rows = end_to_end_lower_bound_demo(&self.grid, &setup, &fr.pipeline_n_list)?;
            let mut p = Table::new(&[
                "N",
                "j",
                "hypotheses",
                "eta",
                "alpha",
                "bound",
                "min_separation",
                "separation_scaled",
                "shrink_steps",
            ]);
            for r in &rows {
                p.push(vec![
                    r.n.to_string(),
                    r.j.to_string(),
                    r.hypotheses.to_string(),
                    num(r.eta),
                    num(r.alpha),
                    num(r.bound),
                    num(r.min_separation),
                    num(r.separation_scaled),
                    r.shrink_steps.to_string(),
                ]);
            }
            out.check(
                "minimax.pipeline_bound",
                rows.iter().all(|r| r.bound > 0.25),
            );
            out.tables.push(("minimax_pipeline".into(), p));
        }
        Ok(out)
    }

    fn kl(&self) -> Result<Outcome> {
        let fr = self.cfg.section(&self.cfg.frame, "frame", "kl")?;
        let reference = self.full(&self.f0)?;
        let mut t = Table::new(&[
            "j",
            "m",
            "m_prime",
            "per_step_kl",
            "per_step_kl_reversed",
            "total",
            "hminus1_sq",
            "ratio",
        ]);
        for &j in &fr.j_scales {
            let fam = self.hypothesis_family(fr, j)?;
            let spectra = member_spectra(&self.grid, &fam)?;
            let mut pairs = audit_pairs(fam.members.len(), fr.pairs_count, self.seed);
            pairs.truncate(fr.pairs_count);
            let rows = pairs
                .par_iter()
                .map(|&(a, b)| {
                    kl_joint(
                        &self.grid,
                        &fam.members[a],
                        &fam.members[b],
                        &spectra[a],
                        &spectra[b],
                        &reference,
                        self.cfg.operator.d_time,
                        fr.n_samples,
                        (a, b),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            for r in rows {
                let ratio = r.total / (r.n as f64 * r.hminus1_sq);
                t.push(vec![
                    j.to_string(),
                    r.pair.0.to_string(),
                    r.pair.1.to_string(),
                    num(r.per_step_kl),
                    num(r.per_step_kl_reversed),
                    num(r.total),
                    num(r.hminus1_sq),
                    num(ratio),
                ]);
            }
        }
        let mut out = Outcome::default();
        let worst = t.numbers("ratio").into_iter().fold(0.0, f64::max);
        match self.golden("kl_constant")? {
            Some(c) => out.check("kl.transfer", worst <= c),
            None => log::warn!("no golden `kl_constant`; skipping `kl.transfer`"),
        }
        out.check(
            "kl.nonnegative",
            t.numbers("per_step_kl").iter().all(|&v| v >= 0.0),
        );
        out.tables.push(("kl".into(), t));
        Ok(out)
    }

    fn simulation(&self, sub: Subcommand) -> Result<(&SimulationSection, DiffusivityField)> {
        let sim = self
            .cfg
            .section(&self.cfg.simulation, "simulation", sub.name())?;
        let f = DiffusivityField::constant(&self.grid, sim.diffusivity_constant)?;
        Ok((sim, f))
    }

    fn simulate(&self) -> Result<Outcome> {
        let (sim, f) = self.simulation(Subcommand::Simulate)?;
        let d = self.cfg.operator.d_time;
        let sample = simulate(
            &self.grid,
            &f,
            SimConfig {
                d_time: d,
                n_obs: sim.n_samples,
                dt: sim.dt_time,
                seed: self.seed,
            },
        )?;
        let mut out = Outcome::default();
        let domain = self.grid.domain();
        out.check(
            "simulate.inside",
            sample.positions.iter().all(|p| domain.contains(*p)),
        );
        let mut t = Table::new(&["statistic", "value"]);
        t.push(vec!["transitions".into(), sample.transitions().to_string()]);
        t.push(vec!["dt".into(), num(sample.dt)]);
        t.push(vec![
            "reflections".into(),
            sample.reflection_count.to_string(),
        ]);
        if self.grid.dim() == 1 {
            let [lo, hi] = domain.bounds[0];
            let xs: Vec<f64> = sample.positions.iter().map(|p| p[0]).collect();
            let ks = ks_uniform(&xs, lo, hi);
            let crit = ks_critical_1pct(xs.len());
            t.push(vec!["ks".into(), num(ks)]);
            t.push(vec!["ks_critical_1pct".into(), num(crit)]);
            out.check("simulate.ks_uniformity", ks <= crit);
            let es = self.full(&f)?;
            let density = transition_density(&self.grid, &es, d)?;
            let cells = histogram_vs_density(&self.grid, &sample, &density, sim.histogram_bins)?;
            let worst = cells.iter().map(|c| c.z_score()).fold(0.0, f64::max);
            t.push(vec!["histogram_max_z".into(), num(worst)]);
            out.check("simulate.histogram", worst <= 3.0);
            let mut h = Table::new(&[
                "from_bin",
                "to_bin",
                "empirical",
                "expected",
                "standard_error",
            ]);
            for c in &cells {
                h.push(vec![
                    c.from_bin.to_string(),
                    c.to_bin.to_string(),
                    num(c.empirical),
                    num(c.expected),
                    num(c.standard_error),
                ]);
            }
            out.tables.push(("simulate_histogram".into(), h));
        }
        out.tables.push(("simulate".into(), t));
        out.texts.push((
            "trajectory.csv".into(),
            write_trajectory(&sample, self.grid.dim()),
        ));
        Ok(out)
    }

    fn estimate(&self) -> Result<Outcome> {
        let (sim, f) = self.simulation(Subcommand::Estimate)?;
        let d = self.cfg.operator.d_time;
        let j = sim.truncation_count;
        let basis = self.full(&self.f0)?;
        let es_f = self.full(&f)?;
        let sample = simulate(
            &self.grid,
            &f,
            SimConfig {
                d_time: d,
                n_obs: sim.n_samples,
                dt: sim.dt_time,
                seed: self.seed,
            },
        )?;
        let est = estimate_transition(&self.grid, &sample, &basis, j)?;
        let density = transition_density(&self.grid, &es_f, d)?;
        let pop = population_transition(&self.grid, &density, &basis, j)?;
        let truth = true_transition(&self.grid, &es_f, &basis, j, d)?;
        let mut out = Outcome::default();
        let mut t = Table::new(&["l", "k", "value", "standard_error", "population", "truth"]);
        let mut pop_err: f64 = 0.0;
        for l in 0..=j {
            for k in 0..=j {
                pop_err = pop_err.max((pop[(l, k)] - truth[(l, k)]).abs());
                t.push(vec![
                    l.to_string(),
                    k.to_string(),
                    num(est.entries[(l, k)]),
                    num(est.standard_errors[(l, k)]),
                    num(pop[(l, k)]),
                    num(truth[(l, k)]),
                ]);
            }
        }
        out.check("estimate.population_limit", pop_err <= 1e-9);
        out.texts
            .push(("estimate_entries.csv".into(), write_estimate(&est)));
        out.tables.push(("estimate".into(), t));
        if !sim.n_list.is_empty() {
            let rows = risk_curve(
                &self.grid,
                &f,
                &es_f,
                &basis,
                RiskSetup {
                    d_time: d,
                    dt: sim.dt_time,
                    truncation: j,
                    seeds: sim.seeds_count,
                    base_seed: self.seed,
                },
                &sim.n_list,
            )?;
            let mut r = Table::new(&["N", "mean_error", "standard_error", "seeds"]);
            for row in &rows {
                r.push(vec![
                    row.n.to_string(),
                    num(row.mean_error),
                    num(row.standard_error),
                    row.seeds.to_string(),
                ]);
            }
            out.check(
                "estimate.risk_decreasing",
                rows.windows(2).all(|w| w[1].mean_error < w[0].mean_error),
            );
            if rows.len() >= 2 {
                let slope = log_log_slope(&rows);
                out.check("estimate.risk_slope", (-0.7..=-0.3).contains(&slope));
            }
            out.tables.push(("estimate_risk".into(), r));
        }
        Ok(out)
    }

    fn rates(&self) -> Result<Outcome> {
        let d = self.grid.dim();
        let s = self.cfg.operator.s_smoothness;
        let exponent = rate_exponent(s, d)?;
        let mut t = Table::new(&["quantity", "N", "value"]);
        t.push(vec!["rate_exponent".into(), String::new(), num(exponent)]);
        let n_list = self
            .cfg
            .simulation
            .as_ref()
            .map(|s| s.n_list.clone())
            .unwrap_or_else(|| vec![100, 1000, 10_000, 100_000]);
        for n in n_list {
            t.push(vec![
                "scale_j".into(),
                n.to_string(),
                scale_for_sample_size(n, s, d).to_string(),
            ]);
            t.push(vec![
                "rate".into(),
                n.to_string(),
                num((n as f64).powf(-exponent)),
            ]);
        }
        t.push(vec![
            "b1_bound_m16_alpha0.05".into(),
            String::new(),
            num(theorem_b1_bound(16, 0.05)?),
        ]);
        let mut out = Outcome::default();
        out.check("rates.positive", exponent > 0.0 && exponent < 0.5);
        out.tables.push(("rates".into(), t));
        Ok(out)
    }
}
