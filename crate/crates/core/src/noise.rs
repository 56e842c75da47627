//! Parametric device noise: gate depolarizing, idle damping, coherent ZZ
//! crosstalk along a coupling graph, and classical readout flips.
//!
//! One noisy timestep is defined as:
//! 1. each layer gate, followed by `depolarizing(p1)` on its qubit (1-qubit
//!    gates) or `depolarizing(p2)` on its pair (CX);
//! 2. `exp(−iθ Z⊗Z/2)` on every coupling edge;
//! 3. amplitude damping then phase damping on every qubit.
//!
//! Readout flips only affect sampled measurements.

use std::collections::BTreeSet;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::circuit::CircuitLayer;
use crate::error::{Error, Result};
use crate::quantum::{ComplexMatrix, DensityMatrix, KrausChannel, UnitaryGate};

/// Undirected qubit coupling graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    num_qubits: usize,
    edges: Vec<(usize, usize)>,
}

impl Topology {
    pub fn new(num_qubits: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for &(a, b) in &edges {
            if a == b {
                return Err(Error::InvalidTopology(format!("self-edge {a}-{b}")));
            }
            if a >= num_qubits || b >= num_qubits {
                return Err(Error::InvalidTopology(format!(
                    "edge {a}-{b} out of range for {num_qubits} qubits"
                )));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::InvalidTopology(format!("duplicate edge {a}-{b}")));
            }
        }
        Ok(Self { num_qubits, edges })
    }

    pub fn empty(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            edges: Vec::new(),
        }
    }

    /// Two rails of `n/2` qubits joined by rungs `(2k, 2k+1)`, in the style of a
    /// dense ladder lattice. Rails are `(2k, 2k+2)` and `(2k+1, 2k+3)`.
    pub fn ladder(num_qubits: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for k in (0..num_qubits).step_by(2) {
            if k + 1 < num_qubits {
                edges.push((k, k + 1));
            }
            if k + 2 < num_qubits {
                edges.push((k, k + 2));
            }
            if k + 3 < num_qubits {
                edges.push((k + 1, k + 3));
            }
        }
        Self::new(num_qubits, edges)
    }

    /// Nearest-neighbour chain `0-1-2-…`, a sparse coupling graph.
    pub fn chain(num_qubits: usize) -> Result<Self> {
        let edges = (1..num_qubits).map(|q| (q - 1, q)).collect();
        Self::new(num_qubits, edges)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }
}

/// Noise parameters of one device. All probabilities lie in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceNoiseProfile {
    pub p1: f64,
    pub p2: f64,
    pub gamma_idle: f64,
    pub lambda_idle: f64,
    pub zz_theta: f64,
    /// `(P(0→1), P(1→0))` at readout.
    pub readout_flip: (f64, f64),
    pub topology: Topology,
}

impl DeviceNoiseProfile {
    pub fn noiseless(num_qubits: usize) -> Self {
        Self {
            p1: 0.0,
            p2: 0.0,
            gamma_idle: 0.0,
            lambda_idle: 0.0,
            zz_theta: 0.0,
            readout_flip: (0.0, 0.0),
            topology: Topology::empty(num_qubits),
        }
    }

    /// Built-in profiles. Values are illustrative, not calibrated to any device.
    ///
    /// * `strong-dense`: larger two-qubit error and crosstalk on a ladder lattice.
    /// * `weak-sparse`: milder noise on a nearest-neighbour chain.
    /// * `noiseless`: everything zero, no edges.
    pub fn preset(name: &str, num_qubits: usize) -> Result<Self> {
        let profile = match name {
            "strong-dense" => Self {
                p1: 0.002,
                p2: 0.03,
                gamma_idle: 0.01,
                lambda_idle: 0.02,
                zz_theta: 0.1,
                readout_flip: (0.02, 0.04),
                topology: Topology::ladder(num_qubits)?,
            },
            "weak-sparse" => Self {
                p1: 0.0005,
                p2: 0.01,
                gamma_idle: 0.003,
                lambda_idle: 0.005,
                zz_theta: 0.03,
                readout_flip: (0.01, 0.02),
                topology: Topology::chain(num_qubits)?,
            },
            "noiseless" => Self::noiseless(num_qubits),
            other => {
                return Err(Error::Config(format!(
                    "unknown noise preset `{other}` (expected strong-dense, weak-sparse or noiseless)"
                )))
            }
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<()> {
        for (field, v) in [
            ("gates.p1", self.p1),
            ("gates.p2", self.p2),
            ("idle.gamma", self.gamma_idle),
            ("idle.lambda", self.lambda_idle),
            ("readout.r01", self.readout_flip.0),
            ("readout.r10", self.readout_flip.1),
        ] {
            check_probability(field, v)?;
        }
        if !self.zz_theta.is_finite() {
            return Err(Error::range("crosstalk.zz_theta", "must be finite"));
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.p1 == 0.0
            && self.p2 == 0.0
            && self.gamma_idle == 0.0
            && self.lambda_idle == 0.0
            && (self.zz_theta == 0.0 || self.topology.edges().is_empty())
    }

    /// Parses the sectioned profile document (see `profiles/README.md`).
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let doc: ProfileDoc =
            toml::from_str(text).map_err(|e| Error::Parse(format!("noise profile: {e}")))?;
        let mut edges = Vec::with_capacity(doc.topology.edges.len());
        for raw in &doc.topology.edges {
            edges.push(parse_edge(raw)?);
        }
        let profile = Self {
            p1: doc.gates.p1,
            p2: doc.gates.p2,
            gamma_idle: doc.idle.gamma,
            lambda_idle: doc.idle.lambda,
            zz_theta: doc.crosstalk.zz_theta,
            readout_flip: (doc.readout.r01, doc.readout.r10),
            topology: Topology::new(doc.topology.num_qubits, edges)?,
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| e.context(path.display().to_string()))
    }

    /// Serializes back into the document format.
    pub fn to_toml_string(&self) -> String {
        let doc = ProfileDoc {
            gates: GatesSection {
                p1: self.p1,
                p2: self.p2,
            },
            idle: IdleSection {
                gamma: self.gamma_idle,
                lambda: self.lambda_idle,
            },
            crosstalk: CrosstalkSection {
                zz_theta: self.zz_theta,
            },
            readout: ReadoutSection {
                r01: self.readout_flip.0,
                r10: self.readout_flip.1,
            },
            topology: TopologySection {
                num_qubits: self.topology.num_qubits(),
                edges: self
                    .topology
                    .edges()
                    .iter()
                    .map(|(a, b)| format!("{a}-{b}"))
                    .collect(),
            },
        };
        toml::to_string(&doc).expect("profile document serializes")
    }
}

/// Parses a profile from a file path, or from a preset name when the value
/// has the form `preset:<name>`.
pub fn load_noise_profile(path_or_preset: &str, num_qubits: usize) -> Result<DeviceNoiseProfile> {
    match path_or_preset.strip_prefix("preset:") {
        Some(name) => DeviceNoiseProfile::preset(name, num_qubits),
        None => DeviceNoiseProfile::load(path_or_preset),
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileDoc {
    #[serde(default)]
    gates: GatesSection,
    #[serde(default)]
    idle: IdleSection,
    #[serde(default)]
    crosstalk: CrosstalkSection,
    #[serde(default)]
    readout: ReadoutSection,
    topology: TopologySection,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct GatesSection {
    p1: f64,
    p2: f64,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct IdleSection {
    gamma: f64,
    lambda: f64,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct CrosstalkSection {
    zz_theta: f64,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ReadoutSection {
    r01: f64,
    r10: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TopologySection {
    num_qubits: usize,
    #[serde(default)]
    edges: Vec<String>,
}

fn parse_edge(raw: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parse(format!("topology.edges: `{raw}` is not of the form i-j"));
    let (a, b) = raw.split_once('-').ok_or_else(bad)?;
    let a = a.trim().parse().map_err(|_| bad())?;
    let b = b.trim().parse().map_err(|_| bad())?;
    Ok((a, b))
}

fn check_probability(field: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::range(field, format!("{p} is not in [0, 1]")));
    }
    Ok(())
}

fn pauli(index: usize) -> ComplexMatrix {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let data = match index {
        0 => vec![o, z, z, o],
        1 => vec![z, o, o, z],
        2 => vec![z, -i, i, z],
        _ => vec![o, z, z, -o],
    };
    ComplexMatrix::from_vec(2, 2, data).expect("2x2")
}

/// `(1−p)ρ + p·I/d` on `targets` (one or two qubits) as an explicit Kraus set.
pub fn depolarizing_channel(p: f64, targets: &[usize]) -> Result<KrausChannel> {
    check_probability("p", p)?;
    let k = targets.len();
    if k == 0 || k > 2 {
        return Err(Error::InvalidChannel(format!(
            "depolarizing supports 1 or 2 qubits, got {k}"
        )));
    }
    let n_paulis = 1usize << (2 * k);
    let weight = p / n_paulis as f64;
    let identity_weight = 1.0 - p + weight;
    let mut ops = Vec::with_capacity(n_paulis);
    for idx in 0..n_paulis {
        let w = if idx == 0 { identity_weight } else { weight };
        if w == 0.0 {
            continue;
        }
        let string = if k == 1 {
            pauli(idx)
        } else {
            pauli(idx / 4).kron(&pauli(idx % 4))
        };
        ops.push(string.scale(Complex64::new(w.sqrt(), 0.0)));
    }
    KrausChannel::new(targets.to_vec(), ops)
}

/// T1-type relaxation toward `|0⟩`.
pub fn amplitude_damping_channel(gamma: f64, target: usize) -> Result<KrausChannel> {
    check_probability("gamma", gamma)?;
    let k0 = ComplexMatrix::from_real_diagonal(&[1.0, (1.0 - gamma).sqrt()]);
    let mut k1 = ComplexMatrix::zeros(2, 2);
    k1.set(0, 1, Complex64::new(gamma.sqrt(), 0.0));
    KrausChannel::new(vec![target], vec![k0, k1])
}

/// Dephasing that scales off-diagonal entries by `√(1−λ)`.
pub fn phase_damping_channel(lambda: f64, target: usize) -> Result<KrausChannel> {
    check_probability("lambda", lambda)?;
    let k0 = ComplexMatrix::from_real_diagonal(&[1.0, (1.0 - lambda).sqrt()]);
    let k1 = ComplexMatrix::from_real_diagonal(&[0.0, lambda.sqrt()]);
    KrausChannel::new(vec![target], vec![k0, k1])
}

/// `exp(−iθ Z⊗Z/2)` on a coupling edge.
pub fn zz_crosstalk_gate(theta: f64, edge: (usize, usize)) -> Result<UnitaryGate> {
    UnitaryGate::zz(edge.0, edge.1, theta)
}

/// Prebuilt channels for one profile, reused across timesteps.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    profile: DeviceNoiseProfile,
    crosstalk: Vec<UnitaryGate>,
    idle: Vec<KrausChannel>,
}

impl NoiseModel {
    pub fn new(profile: DeviceNoiseProfile) -> Result<Self> {
        profile.validate()?;
        let crosstalk = if profile.zz_theta == 0.0 {
            Vec::new()
        } else {
            profile
                .topology
                .edges()
                .iter()
                .map(|&e| zz_crosstalk_gate(profile.zz_theta, e))
                .collect::<Result<_>>()?
        };
        let mut idle = Vec::new();
        for q in 0..profile.topology.num_qubits() {
            if profile.gamma_idle > 0.0 {
                idle.push(amplitude_damping_channel(profile.gamma_idle, q)?);
            }
            if profile.lambda_idle > 0.0 {
                idle.push(phase_damping_channel(profile.lambda_idle, q)?);
            }
        }
        // Amplitude damping precedes phase damping on each qubit; channels on
        // distinct qubits commute, so per-qubit interleaving is equivalent.
        Ok(Self {
            profile,
            crosstalk,
            idle,
        })
    }

    pub fn profile(&self) -> &DeviceNoiseProfile {
        &self.profile
    }

    /// Applies the layer gate by gate with gate noise, then crosstalk and idle damping.
    pub fn step(&self, state: &mut DensityMatrix, layer: &CircuitLayer) -> Result<()> {
        let n = state.num_qubits();
        if self.profile.topology.num_qubits() != n || layer.num_qubits() != n {
            return Err(Error::Dimension(format!(
                "state has {n} qubits, topology {}, layer {}",
                self.profile.topology.num_qubits(),
                layer.num_qubits()
            )));
        }
        for gate in layer.gates() {
            state.apply_unitary_mut(gate)?;
            let p = if gate.num_targets() == 1 {
                self.profile.p1
            } else {
                self.profile.p2
            };
            if p > 0.0 {
                state.apply_channel_mut(&depolarizing_channel(p, gate.targets())?)?;
            }
        }
        for gate in &self.crosstalk {
            state.apply_unitary_mut(gate)?;
        }
        for channel in &self.idle {
            state.apply_channel_mut(channel)?;
        }
        Ok(())
    }
}

/// One full noisy timestep `E_device(U ρ U†)` for `layer`.
pub fn apply_device_noise(
    state: &DensityMatrix,
    profile: &DeviceNoiseProfile,
    layer: &CircuitLayer,
) -> Result<DensityMatrix> {
    let model = NoiseModel::new(profile.clone())?;
    let mut out = state.clone();
    model.step(&mut out, layer)?;
    Ok(out)
}
