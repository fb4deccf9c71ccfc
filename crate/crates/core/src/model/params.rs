use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tape::{Tape, Var};
use crate::tensor::Mat;

/// Name and shape of one parameter group inside a [`ParamSet`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
}

impl GroupSpec {
    pub fn new(name: &str, rows: usize, cols: usize) -> Self {
        GroupSpec {
            name: name.to_string(),
            rows,
            cols,
        }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Named parameter groups backed by one flat array, in declaration order.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamSet {
    specs: Vec<GroupSpec>,
    offsets: Vec<usize>,
    values: Vec<f64>,
}

pub(crate) enum Init {
    Zeros,
    Uniform(f64),
    /// Glorot/Xavier uniform.
    Glorot,
}

impl ParamSet {
    pub fn from_parts(specs: Vec<GroupSpec>, values: Vec<f64>) -> Result<Self> {
        let mut offsets = Vec::with_capacity(specs.len());
        let mut total = 0;
        for s in &specs {
            offsets.push(total);
            total += s.len();
        }
        if total != values.len() {
            return Err(Error::Shape(format!(
                "declared shapes hold {total} values but {} were given",
                values.len()
            )));
        }
        Ok(ParamSet { specs, offsets, values })
    }

    pub(crate) fn initialize(groups: &[(GroupSpec, Init)], rng: &mut impl Rng) -> Self {
        let mut values = Vec::new();
        for (spec, init) in groups {
            match init {
                Init::Zeros => values.extend(std::iter::repeat_n(0.0, spec.len())),
                Init::Uniform(a) => values.extend((0..spec.len()).map(|_| rng.random_range(-*a..=*a))),
                Init::Glorot => {
                    let a = (6.0 / (spec.rows + spec.cols) as f64).sqrt();
                    values.extend((0..spec.len()).map(|_| rng.random_range(-a..=a)))
                }
            }
        }
        let specs = groups.iter().map(|(s, _)| s.clone()).collect();
        Self::from_parts(specs, values).expect("initializer produced consistent shapes")
    }

    pub fn specs(&self) -> &[GroupSpec] {
        &self.specs
    }

    /// Total parameter count, fixed at construction.
    pub fn num_params(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn group(&self, index: usize) -> &[f64] {
        let start = self.offsets[index];
        &self.values[start..start + self.specs[index].len()]
    }

    pub fn mat(&self, index: usize) -> Mat {
        let s = &self.specs[index];
        Mat::from_vec(s.rows, s.cols, self.group(index).to_vec())
    }

    /// Name of the first group holding a non-finite value.
    pub fn first_non_finite(&self) -> Option<&str> {
        (0..self.specs.len())
            .find(|&i| !self.group(i).iter().all(|x| x.is_finite()))
            .map(|i| self.specs[i].name.as_str())
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.first_non_finite() {
            Some(name) => Err(Error::NonFinite(name.to_string())),
            None => Ok(()),
        }
    }

    /// Places every group on the tape, as variables or as constants.
    pub fn load(&self, tape: &mut Tape, trainable: bool) -> Vec<Var> {
        (0..self.specs.len())
            .map(|i| {
                let m = self.mat(i);
                if trainable {
                    tape.variable(m)
                } else {
                    tape.constant(m)
                }
            })
            .collect()
    }

    /// Concatenates per-group gradients into one flat vector, zero where a
    /// group received no gradient.
    pub fn flatten_grads(&self, tape: &Tape, grads: &[Option<Var>]) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.values.len());
        for (spec, g) in self.specs.iter().zip(grads) {
            match g {
                Some(v) => {
                    let m = tape.value(*v);
                    debug_assert_eq!(m.data.len(), spec.len());
                    flat.extend_from_slice(&m.data);
                }
                None => flat.extend(std::iter::repeat_n(0.0, spec.len())),
            }
        }
        flat
    }
}
