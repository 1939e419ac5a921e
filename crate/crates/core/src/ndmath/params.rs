//! Uniform access to named parameter tensors, used by the optimizer,
//! gradient checks and checkpoint persistence.

/// A named, shaped view of one parameter tensor.
pub struct TensorRef<'a> {
    pub name: String,
    pub dims: Vec<usize>,
    pub values: &'a [f64],
}

pub struct TensorMut<'a> {
    pub name: String,
    pub dims: Vec<usize>,
    pub values: &'a mut [f64],
}

pub trait Parameters {
    /// Visits every tensor in a fixed order. Names are prefixed with `prefix`.
    fn tensors<'a>(&'a self, prefix: &str, out: &mut Vec<TensorRef<'a>>);

    /// Same order as [`Parameters::tensors`].
    fn tensors_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<TensorMut<'a>>);

    fn tensor_list(&self) -> Vec<TensorRef<'_>> {
        let mut out = Vec::new();
        self.tensors("", &mut out);
        out
    }

    fn param_count(&self) -> usize {
        self.tensor_list().iter().map(|t| t.values.len()).sum()
    }

    fn flatten(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.param_count());
        for t in self.tensor_list() {
            flat.extend_from_slice(t.values);
        }
        flat
    }

    /// Overwrites all parameters from a flat slice laid out as in [`Parameters::flatten`].
    fn assign(&mut self, flat: &[f64]) {
        let mut list = Vec::new();
        self.tensors_mut("", &mut list);
        let total: usize = list.iter().map(|t| t.values.len()).sum();
        assert_eq!(total, flat.len(), "flat parameter length mismatch");
        let mut offset = 0;
        for t in list {
            let n = t.values.len();
            t.values.copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
    }

    fn zero(&mut self) {
        let mut list = Vec::new();
        self.tensors_mut("", &mut list);
        for t in list {
            t.values.iter_mut().for_each(|v| *v = 0.0);
        }
    }

    fn all_finite(&self) -> bool {
        self.tensor_list()
            .iter()
            .all(|t| t.values.iter().all(|v| v.is_finite()))
    }
}

pub(crate) fn join(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}/{name}")
    }
}
