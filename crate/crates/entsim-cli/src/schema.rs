//! On-disk JSON formats and their conversions to library types.
//!
//! Conventions, shared by every file the tool reads or writes:
//!
//! * complex numbers are two-element arrays `[re, im]`;
//! * matrices are row-major nested arrays;
//! * classical channels carry an explicit `"convention": "column-stochastic"`
//!   tag, with `matrix[y][x] = P(y | x)`;
//! * outcome indices in `atom_index` are 1-based, matching the outcome
//!   labels used in reports.

use entsim::channels::{ClassicalChannel, Game};
use entsim::quantum::{PositiveDecomposition, Povm};
use entsim::simulate::{ConvexDecomposition, TheoremInstance};
use entsim::ComplexMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const CHANNEL_CONVENTION: &str = "column-stochastic";

/// A complex entry `[re, im]`.
pub type ComplexPair = [f64; 2];

/// A complex matrix as row-major nested arrays of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<ComplexPair>>;

/// A real matrix as row-major nested arrays.
pub type RealMatrixJson = Vec<Vec<f64>>;

/// Input format for `decompose`: a receiver dimension, the two measurement
/// families, and one positive split of the receiver marginal per input.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub d: usize,
    pub e_plus: Vec<MatrixJson>,
    pub e_minus: Vec<MatrixJson>,
    /// One `[beta_plus, beta_minus]` pair per channel input.
    pub betas: Vec<[MatrixJson; 2]>,
}

/// Input format for `membership`: a classical channel.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub inputs: usize,
    pub outputs: usize,
    pub convention: String,
    pub matrix: RealMatrixJson,
}

/// Output format for `decompose`: a convex mixture of channels, with the
/// four-index atom each component came from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub weights: Vec<f64>,
    pub components: Vec<RealMatrixJson>,
    /// 1-based outcome quadruples, one per component.
    pub atom_index: Vec<[usize; 4]>,
}

pub fn complex_matrix_to_json(m: &ComplexMatrix) -> MatrixJson {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn json_to_complex_matrix(m: &MatrixJson, d: usize, field: &str) -> Result<ComplexMatrix, String> {
    if m.len() != d {
        return Err(format!("{field}: expected {d} rows, found {}", m.len()));
    }
    for (i, row) in m.iter().enumerate() {
        if row.len() != d {
            return Err(format!(
                "{field}: row {i} has {} entries, expected {d}",
                row.len()
            ));
        }
    }
    Ok(ComplexMatrix::from_fn(d, d, |i, j| {
        entsim::Complex::new(m[i][j][0], m[i][j][1])
    }))
}

pub fn channel_to_file(c: &ClassicalChannel) -> ChannelFile {
    let matrix = (0..c.n_outputs())
        .map(|y| (0..c.n_inputs()).map(|x| c.prob(y, x)).collect())
        .collect();
    ChannelFile {
        inputs: c.n_inputs(),
        outputs: c.n_outputs(),
        convention: CHANNEL_CONVENTION.to_owned(),
        matrix,
    }
}

pub fn channel_from_file(f: &ChannelFile) -> Result<ClassicalChannel, String> {
    if f.convention != CHANNEL_CONVENTION {
        return Err(format!(
            "convention: expected \"{CHANNEL_CONVENTION}\", found \"{}\"",
            f.convention
        ));
    }
    if f.matrix.len() != f.outputs {
        return Err(format!(
            "matrix: expected {} rows (one per output), found {}",
            f.outputs,
            f.matrix.len()
        ));
    }
    let mut probs = Vec::with_capacity(f.outputs * f.inputs);
    for (y, row) in f.matrix.iter().enumerate() {
        if row.len() != f.inputs {
            return Err(format!(
                "matrix: row {y} has {} entries, expected {} (one per input)",
                row.len(),
                f.inputs
            ));
        }
        probs.extend_from_slice(row);
    }
    ClassicalChannel::new(f.inputs, f.outputs, probs).map_err(|e| format!("matrix: {e}"))
}

pub fn instance_to_file(inst: &TheoremInstance) -> InstanceFile {
    InstanceFile {
        d: inst.d(),
        e_plus: inst.e_plus().elements().iter().map(complex_matrix_to_json).collect(),
        e_minus: inst.e_minus().elements().iter().map(complex_matrix_to_json).collect(),
        betas: inst
            .betas()
            .iter()
            .map(|dec| {
                [
                    complex_matrix_to_json(&dec.parts()[0]),
                    complex_matrix_to_json(&dec.parts()[1]),
                ]
            })
            .collect(),
    }
}

pub fn instance_from_file(f: &InstanceFile) -> Result<TheoremInstance, String> {
    if f.d == 0 {
        return Err("d: must be positive".to_owned());
    }
    let read_povm = |mats: &[MatrixJson], field: &str| -> Result<Povm, String> {
        let elements = mats
            .iter()
            .enumerate()
            .map(|(i, m)| json_to_complex_matrix(m, f.d, &format!("{field}[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        Povm::new(elements).map_err(|e| format!("{field}: {e}"))
    };
    let e_plus = read_povm(&f.e_plus, "e_plus")?;
    let e_minus = read_povm(&f.e_minus, "e_minus")?;
    let marginal = ComplexMatrix::identity(f.d).scale_re(1.0 / f.d as f64);
    let betas = f
        .betas
        .iter()
        .enumerate()
        .map(|(j, pair)| {
            let plus = json_to_complex_matrix(&pair[0], f.d, &format!("betas[{j}][0]"))?;
            let minus = json_to_complex_matrix(&pair[1], f.d, &format!("betas[{j}][1]"))?;
            PositiveDecomposition::new(marginal.clone(), vec![plus, minus])
                .map_err(|e| format!("betas[{j}]: {e}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    TheoremInstance::new(f.d, e_plus, e_minus, betas).map_err(|e| e.to_string())
}

pub fn decomposition_to_file(dec: &ConvexDecomposition) -> Result<DecompositionFile, String> {
    let atoms = dec
        .atoms()
        .ok_or_else(|| "decomposition carries no atom index".to_owned())?;
    let components = dec
        .components()
        .iter()
        .map(|c| channel_to_file(c).matrix)
        .collect();
    Ok(DecompositionFile {
        weights: dec.weights().to_vec(),
        components,
        atom_index: atoms.iter().map(|a| a.map(|i| i + 1)).collect(),
    })
}

pub fn decomposition_from_file(f: &DecompositionFile) -> Result<ConvexDecomposition, String> {
    if f.components.len() != f.weights.len() || f.atom_index.len() != f.weights.len() {
        return Err(format!(
            "weights, components and atom_index must have equal length, found {}/{}/{}",
            f.weights.len(),
            f.components.len(),
            f.atom_index.len()
        ));
    }
    let channels = f
        .components
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let outputs = m.len();
            let inputs = m.first().map_or(0, Vec::len);
            channel_from_file(&ChannelFile {
                inputs,
                outputs,
                convention: CHANNEL_CONVENTION.to_owned(),
                matrix: m.clone(),
            })
            .map_err(|e| format!("components[{i}]: {e}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let atoms = f
        .atom_index
        .iter()
        .enumerate()
        .map(|(i, a)| {
            if a.contains(&0) {
                return Err(format!("atom_index[{i}]: outcome indices are 1-based"));
            }
            Ok(a.map(|v| v - 1))
        })
        .collect::<Result<Vec<_>, _>>()?;
    ConvexDecomposition::new(f.weights.clone(), channels, Some(atoms)).map_err(|e| e.to_string())
}

/// Serialize a convex mixture as a report value. Unlike
/// [`decomposition_to_file`] this tolerates mixtures without an atom index,
/// such as membership certificates.
pub fn mixture_to_value(dec: &ConvexDecomposition) -> Value {
    let components: Vec<Value> = dec
        .components()
        .iter()
        .map(|c| {
            serde_json::to_value(channel_to_file(c).matrix)
                .expect("nested float arrays always serialize")
        })
        .collect();
    let mut map = Map::new();
    map.insert("weights".to_owned(), Value::from(dec.weights().to_vec()));
    map.insert("components".to_owned(), Value::Array(components));
    if let Some(atoms) = dec.atoms() {
        let idx: Vec<Value> = atoms
            .iter()
            .map(|a| Value::from(a.map(|i| i + 1).to_vec()))
            .collect();
        map.insert("atom_index".to_owned(), Value::Array(idx));
    }
    Value::Object(map)
}

/// Serialize a game as a report value: input distribution plus a reward
/// table indexed `reward[x][y]`.
pub fn game_to_value(g: &Game) -> Value {
    let reward: Vec<Value> = (0..g.n_inputs())
        .map(|x| {
            Value::from(
                (0..g.n_outputs())
                    .map(|y| g.reward(x, y))
                    .collect::<Vec<f64>>(),
            )
        })
        .collect();
    let mut map = Map::new();
    map.insert("input_distribution".to_owned(), Value::from(g.input_dist().to_vec()));
    map.insert("reward".to_owned(), Value::from(reward));
    Value::Object(map)
}
