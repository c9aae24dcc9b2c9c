//! Labeled samples over `{±1}^len`.

use serde::{Deserialize, Serialize};

use crate::csp::Sign;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Example {
    pub instance: Vec<Sign>,
    pub label: bool,
}

/// A sequence of `(instance, label)` pairs; every instance has length `len`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledSample {
    len: usize,
    examples: Vec<Example>,
}

impl LabeledSample {
    pub fn new(len: usize, examples: Vec<Example>) -> Result<Self> {
        if let Some(e) = examples.iter().find(|e| e.instance.len() != len) {
            return Err(Error::ArityMismatch {
                expected: len,
                got: e.instance.len(),
            });
        }
        Ok(Self { len, examples })
    }

    pub fn empty(len: usize) -> Self {
        Self {
            len,
            examples: Vec::new(),
        }
    }

    pub fn instance_len(&self) -> usize {
        self.len
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn push(&mut self, instance: Vec<Sign>, label: bool) -> Result<()> {
        if instance.len() != self.len {
            return Err(Error::ArityMismatch {
                expected: self.len,
                got: instance.len(),
            });
        }
        self.examples.push(Example { instance, label });
        Ok(())
    }

    pub fn positives(&self) -> usize {
        self.examples.iter().filter(|e| e.label).count()
    }
}
