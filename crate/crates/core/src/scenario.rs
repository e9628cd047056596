//! JSON scenario documents driving the `talbot` binary and the library
//! examples. Lengths are in metres, angles in radians, frequencies in hertz;
//! field names carry the unit.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analysis::{PlaneLabel, Region};
use crate::assembly::{AssemblyScenario, LossModel, PlannerOptions, TargetPattern};
use crate::atoms::{envelope_depths, LoadingModel, SiteSet};
use crate::error::{Error, Result};
use crate::optics::{FieldModel, GridSpec, OpticalConfig, PropagationOptions, TransferFunction};
use crate::register::{build_register, interleave, InterleaveSpec, Register};

fn default_planes() -> Vec<PlaneLabel> {
    vec![PlaneLabel::ZERO]
}

fn default_trials() -> usize {
    1000
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldModelName {
    #[default]
    Beamlets,
    Mask,
}

fn default_span() -> [f64; 2] {
    [-1.0, 0.5]
}

fn default_slices() -> usize {
    128
}

fn default_samples_per_waist() -> f64 {
    16.0
}

fn default_guard_cells() -> f64 {
    8.0
}

/// Axial sampling and grid of the carpet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarpetSection {
    /// Explicit slice positions; overrides the span when present.
    #[serde(default)]
    pub z_m: Option<Vec<f64>>,
    /// Start and end of the sampled range in units of the Talbot length.
    #[serde(default = "default_span")]
    pub z_span_talbot: [f64; 2],
    #[serde(default = "default_slices")]
    pub slices: usize,
    #[serde(default)]
    pub model: FieldModelName,
    #[serde(default)]
    pub paraxial: bool,
    /// Mask model only: treat the window as one period of an unbounded
    /// array. The grid then spans exactly `lenslet_count` pitches and
    /// `guard_cells` is ignored.
    #[serde(default)]
    pub periodic: bool,
    #[serde(default = "default_samples_per_waist")]
    pub samples_per_waist: f64,
    #[serde(default = "default_guard_cells")]
    pub guard_cells: f64,
}

impl Default for CarpetSection {
    fn default() -> Self {
        CarpetSection {
            z_m: None,
            z_span_talbot: default_span(),
            slices: default_slices(),
            model: FieldModelName::default(),
            paraxial: false,
            periodic: false,
            samples_per_waist: default_samples_per_waist(),
            guard_cells: default_guard_cells(),
        }
    }
}

fn default_min_rel_depth() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapSection {
    #[serde(default = "default_min_rel_depth")]
    pub min_rel_depth: f64,
    /// Restrict extraction to the central half of the array.
    #[serde(default)]
    pub central_region: bool,
}

impl Default for TrapSection {
    fn default() -> Self {
        TrapSection { min_rel_depth: default_min_rel_depth(), central_region: false }
    }
}

fn default_rows() -> usize {
    19
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegisterSection {
    #[serde(default = "default_rows")]
    pub rows: usize,
    #[serde(default = "default_rows")]
    pub cols: usize,
}

impl Default for RegisterSection {
    fn default() -> Self {
        RegisterSection { rows: default_rows(), cols: default_rows() }
    }
}

fn default_min_sep() -> f64 {
    3e-6
}

/// One extra beam on the same array. Either a tilt (converted with the
/// array's focal length and Talbot length) or a direct lateral offset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterleaveSection {
    #[serde(default)]
    pub tilt_rad: Option<[f64; 2]>,
    #[serde(default)]
    pub offset_m: Option<[f64; 2]>,
    pub frequency_offset_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterleaveBlock {
    #[serde(default)]
    pub beams: Vec<InterleaveSection>,
    #[serde(default = "default_min_sep")]
    pub min_sep_m: f64,
}

impl Default for InterleaveBlock {
    fn default() -> Self {
        InterleaveBlock { beams: Vec::new(), min_sep_m: default_min_sep() }
    }
}

fn default_p() -> f64 {
    0.529
}

fn default_exponent() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadingSection {
    #[serde(default = "default_p")]
    pub p_max: f64,
    #[serde(default = "default_exponent")]
    pub depth_exponent: f64,
    #[serde(default)]
    pub depth_cutoff: f64,
    /// Use the illumination envelope of `optics` as relative trap depth;
    /// otherwise every site has depth 1.
    #[serde(default)]
    pub envelope: bool,
}

impl LoadingSection {
    pub fn model(&self) -> LoadingModel {
        LoadingModel { p_max: self.p_max, depth_exponent: self.depth_exponent, depth_cutoff: self.depth_cutoff }
    }
}

impl Default for LoadingSection {
    fn default() -> Self {
        LoadingSection { p_max: default_p(), depth_exponent: default_exponent(), depth_cutoff: 0.0, envelope: false }
    }
}

fn default_target() -> usize {
    9
}

fn default_max_cycles() -> u32 {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssemblySection {
    /// Side of the centred square target.
    #[serde(default = "default_target")]
    pub target_size: usize,
    #[serde(default = "default_max_cycles")]
    pub max_cycles: u32,
    #[serde(default)]
    pub planner: PlannerOptions,
}

impl Default for AssemblySection {
    fn default() -> Self {
        AssemblySection { target_size: default_target(), max_cycles: default_max_cycles(), planner: PlannerOptions::default() }
    }
}

fn default_sweep() -> Vec<f64> {
    vec![2e-6, 3e-6, 5e-6]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default = "default_sweep")]
    pub min_sep_m: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection { min_sep_m: default_sweep() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub optics: OpticalConfig,
    #[serde(default = "default_planes")]
    pub planes: Vec<PlaneLabel>,
    #[serde(default)]
    pub carpet: CarpetSection,
    #[serde(default)]
    pub traps: TrapSection,
    #[serde(default)]
    pub register: RegisterSection,
    #[serde(default)]
    pub interleave: InterleaveBlock,
    #[serde(default)]
    pub loading: LoadingSection,
    #[serde(default)]
    pub loss: LossModel,
    #[serde(default)]
    pub assembly: AssemblySection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Where a run writes its artifacts. Not echoed into manifests, so runs
    /// into different directories produce identical files.
    #[serde(default = "default_output_dir", skip_serializing)]
    pub output_dir: PathBuf,
}

impl Scenario {
    /// Defaults around `optics`.
    pub fn new(optics: OpticalConfig) -> Self {
        serde_json::from_value(serde_json::json!({ "optics": optics })).expect("defaults deserialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.optics.validate()?;
        self.loading.model().validate()?;
        self.loss.validate()?;
        let cfg = |m: &str| Err(Error::Config(m.to_string()));
        if self.planes.is_empty() {
            return cfg("planes must list at least one plane");
        }
        if self.register.rows == 0 || self.register.cols == 0 {
            return cfg("register needs at least one row and column");
        }
        if self.assembly.target_size == 0
            || self.assembly.target_size > self.register.rows.min(self.register.cols)
        {
            return cfg("assembly target must fit inside the register");
        }
        if self.assembly.max_cycles == 0 {
            return cfg("assembly.max_cycles must be >= 1");
        }
        if self.trials == 0 {
            return cfg("trials must be >= 1");
        }
        if self.carpet.z_m.is_none() && self.carpet.slices == 0 {
            return cfg("carpet.slices must be >= 1");
        }
        if self.carpet.periodic && self.carpet.model != FieldModelName::Mask {
            return cfg("carpet.periodic applies to the mask model only");
        }
        if self.loading.envelope && self.optics.envelope_waist().is_none() {
            return cfg("loading.envelope needs optics.illumination_waist_m");
        }
        for b in &self.interleave.beams {
            if b.tilt_rad.is_some() == b.offset_m.is_some() {
                return cfg("each interleave beam needs exactly one of tilt_rad or offset_m");
            }
        }
        Ok(())
    }

    /// Plane used for registers, loading and assembly: the first listed.
    pub fn register_plane(&self) -> PlaneLabel {
        self.planes[0]
    }

    pub fn z_samples(&self) -> Result<Vec<f64>> {
        if let Some(z) = &self.carpet.z_m {
            return Ok(z.clone());
        }
        let zt = self.optics.talbot_length()?;
        let [a, b] = self.carpet.z_span_talbot;
        let n = self.carpet.slices;
        Ok((0..n)
            .map(|k| {
                let t = if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
                (a + (b - a) * t) * zt
            })
            .collect())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        if self.carpet.periodic {
            let cells = self.optics.lenslet_count;
            let d = self.optics.trap_waist_m / self.carpet.samples_per_waist;
            let n = ((cells as f64 * self.optics.pitch_m / d).ceil() as usize).next_power_of_two();
            return GridSpec::periodic(self.optics.pitch_m, cells, n);
        }
        GridSpec::for_array(
            self.optics.pitch_m,
            self.optics.lenslet_count,
            self.optics.trap_waist_m,
            self.carpet.samples_per_waist,
            self.carpet.guard_cells,
        )
    }

    pub fn field_model(&self) -> FieldModel {
        match self.carpet.model {
            FieldModelName::Beamlets => FieldModel::Beamlets,
            FieldModelName::Mask => FieldModel::MaskPropagation(PropagationOptions {
                transfer: if self.carpet.paraxial { TransferFunction::Paraxial } else { TransferFunction::Exact },
                periodic: self.carpet.periodic,
                ..PropagationOptions::default()
            }),
        }
    }

    pub fn central_region(&self) -> Option<Region> {
        self.traps.central_region.then(|| Region::central_half(self.optics.pitch_m, self.optics.lenslet_count))
    }

    pub fn base_register(&self) -> Result<Register> {
        build_register(&self.optics, self.register_plane(), self.register.rows, self.register.cols)
    }

    /// Base register followed by one sublattice per interleave beam.
    pub fn registers(&self) -> Result<Vec<Register>> {
        let base = self.base_register()?;
        let mut out = vec![base.clone()];
        for (n, beam) in self.interleave.beams.iter().enumerate() {
            let id = n as u32 + 1;
            let sub = match (beam.tilt_rad, beam.offset_m) {
                (Some(tilt), None) => {
                    let f0 = self.optics.lenslet_focal_m.ok_or_else(|| {
                        Error::Config("tilted interleave beams need optics.lenslet_focal_m".into())
                    })?;
                    let spec = InterleaveSpec {
                        tilt_rad: tilt,
                        lenslet_focal_m: f0,
                        plane: base.plane,
                        talbot_length_pre_m: self.optics.talbot_length_pre()?,
                        magnification: self.optics.demagnification,
                        frequency_offset_hz: beam.frequency_offset_hz,
                    };
                    let mut r = interleave(&base, &spec)?.register;
                    r.sublattice_id = id;
                    r
                }
                (None, Some(d)) => {
                    if !(beam.frequency_offset_hz > 0.0) {
                        return Err(Error::Domain("beams sharing a plane need a non-zero frequency offset".into()));
                    }
                    base.translated(d, id)
                }
                _ => unreachable!("checked by validate"),
            };
            out.push(sub);
        }
        Ok(out)
    }

    /// Load → assemble setup on the base register.
    pub fn assembly_scenario(&self) -> Result<AssemblyScenario> {
        let sites: Arc<SiteSet> = SiteSet::from_register(&self.base_register()?);
        let depths = self.site_depths(&sites);
        let target = TargetPattern::centred_block(sites.clone(), 0, self.assembly.target_size)?;
        Ok(AssemblyScenario {
            sites,
            depths,
            loading: self.loading.model(),
            target,
            loss: self.loss,
            max_cycles: self.assembly.max_cycles,
            planner: self.assembly.planner,
        })
    }

    pub fn site_depths(&self, sites: &SiteSet) -> Vec<f64> {
        match (self.loading.envelope, self.optics.envelope_waist()) {
            (true, Some(w)) => envelope_depths(sites, w),
            _ => vec![1.0; sites.len()],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_grid_spans_whole_cells() {
        let mut s = Scenario::new(OpticalConfig::dense_lattice());
        s.optics.lenslet_count = 6;
        s.carpet.model = FieldModelName::Mask;
        s.carpet.periodic = true;
        s.validate().unwrap();
        let g = s.grid().unwrap();
        assert!((g.extent_x() - 6.0 * s.optics.pitch_m).abs() < 1e-15);
        assert!(g.dx <= s.optics.trap_waist_m / 16.0 && g.nx.is_power_of_two());
        assert!(matches!(s.field_model(), FieldModel::MaskPropagation(o) if o.periodic));
        s.carpet.model = FieldModelName::Beamlets;
        assert!(matches!(s.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn minimal_document_expands_defaults() {
        let text = serde_json::json!({ "optics": OpticalConfig::assembly_lattice() }).to_string();
        let s = Scenario::from_json(&text).unwrap();
        assert_eq!(s.planes, vec![PlaneLabel::ZERO]);
        assert_eq!(s.register.rows, 19);
        assert_eq!(s.carpet.slices, 128);
        assert_eq!(s, Scenario::new(OpticalConfig::assembly_lattice()));
        let echoed = serde_json::to_value(&s).unwrap();
        assert_eq!(echoed["loading"]["p_max"], 0.529);
        assert_eq!(echoed["loss"]["cycle_survival"], 1.0);
    }

    #[test]
    fn unknown_fields_and_bad_values_are_config_errors() {
        let mut v = serde_json::json!({ "optics": OpticalConfig::assembly_lattice(), "bogus": 1 });
        assert!(matches!(Scenario::from_json(&v.to_string()), Err(Error::Config(_))));
        v = serde_json::json!({ "optics": OpticalConfig::assembly_lattice(), "trials": 0 });
        assert!(matches!(Scenario::from_json(&v.to_string()), Err(Error::Config(_))));
        v = serde_json::json!({ "optics": OpticalConfig::assembly_lattice(), "loading": { "p_max": 2.0 } });
        assert!(matches!(Scenario::from_json(&v.to_string()), Err(Error::Config(_))));
    }

    #[test]
    fn z_samples_span_the_range() {
        let s = Scenario::new(OpticalConfig::dense_lattice());
        let z = s.z_samples().unwrap();
        let zt = s.optics.talbot_length().unwrap();
        assert_eq!(z.len(), 128);
        assert!((z[0] + zt).abs() < 1e-18);
        assert!((z[127] - 0.5 * zt).abs() < 1e-15);
    }

    #[test]
    fn offset_beams_build_sublattices() {
        let mut s = Scenario::new(OpticalConfig::dense_lattice());
        s.planes = vec![PlaneLabel::half(1)];
        s.register = RegisterSection { rows: 3, cols: 3 };
        s.assembly.target_size = 3;
        s.interleave.beams.push(InterleaveSection { tilt_rad: None, offset_m: Some([0.0, 5e-6]), frequency_offset_hz: 30e6 });
        let regs = s.registers().unwrap();
        assert_eq!(regs.len(), 2);
        assert_eq!(regs[1].sublattice_id, 1);
        assert!((regs[1].sites[0].y_m - regs[0].sites[0].y_m - 5e-6).abs() < 1e-18);
    }
}
