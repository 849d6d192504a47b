use std::collections::BTreeMap;
use std::sync::Arc;

use super::parse::{is_reserved, parse};
use super::{Expr, Q};
use crate::error::{Error, Result};

/// A single coordinate chart: coordinate names, named parameters (optionally
/// bound to exact values) and excluded loci `{e = 0}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    coords: Vec<Arc<str>>,
    params: Vec<(Arc<str>, Option<Q>)>,
    exclude: Vec<Expr>,
}

fn valid_ident(s: &str) -> bool {
    let mut it = s.chars();
    matches!(it.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && it.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Chart {
    pub fn new(coords: &[&str]) -> Result<Chart> {
        if coords.is_empty() {
            return Err(Error::InvalidChart("dimension must be at least 1".into()));
        }
        let mut c = Chart {
            coords: Vec::new(),
            params: Vec::new(),
            exclude: Vec::new(),
        };
        for name in coords {
            c.check_new_name(name)?;
            c.coords.push(Arc::from(*name));
        }
        Ok(c)
    }

    /// `x1, ..., xm`.
    pub fn euclidean(m: usize) -> Chart {
        let names: Vec<String> = (1..=m).map(|i| format!("x{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        Chart::new(&refs).expect("generated names are valid")
    }

    fn check_new_name(&self, name: &str) -> Result<()> {
        if !valid_ident(name) {
            return Err(Error::InvalidChart(format!("`{name}` is not an identifier")));
        }
        if is_reserved(name) {
            return Err(Error::InvalidChart(format!("`{name}` is a function name")));
        }
        if self.coord_index(name).is_some() || self.has_param(name) {
            return Err(Error::InvalidChart(format!("`{name}` declared twice")));
        }
        Ok(())
    }

    pub fn with_params(mut self, names: &[&str]) -> Result<Chart> {
        for n in names {
            self.check_new_name(n)?;
            self.params.push((Arc::from(*n), None));
        }
        Ok(self)
    }

    pub fn with_param_value(mut self, name: &str, value: Q) -> Result<Chart> {
        if let Some(slot) = self.params.iter_mut().find(|(n, _)| &**n == name) {
            slot.1 = Some(value);
            return Ok(self);
        }
        self.check_new_name(name)?;
        self.params.push((Arc::from(name), Some(value)));
        Ok(self)
    }

    /// Remove the zero set of `e` from the domain.
    pub fn with_exclude(mut self, e: Expr) -> Chart {
        if !self.exclude.contains(&e) {
            self.exclude.push(e);
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Arc<str>] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> &str {
        &self.coords[i]
    }

    pub fn coord_index(&self, name: &str) -> Option<usize> {
        self.coords.iter().position(|c| &**c == name)
    }

    pub fn has_param(&self, name: &str) -> bool {
        self.params.iter().any(|(n, _)| &**n == name)
    }

    pub fn params(&self) -> &[(Arc<str>, Option<Q>)] {
        &self.params
    }

    pub fn param_value(&self, name: &str) -> Option<&Q> {
        self.params
            .iter()
            .find(|(n, _)| &**n == name)
            .and_then(|(_, v)| v.as_ref())
    }

    pub fn bound_params(&self) -> BTreeMap<String, Q> {
        self.params
            .iter()
            .filter_map(|(n, v)| v.as_ref().map(|v| (n.to_string(), v.clone())))
            .collect()
    }

    pub fn unbound_params(&self) -> Vec<Arc<str>> {
        self.params
            .iter()
            .filter(|(_, v)| v.is_none())
            .map(|(n, _)| n.clone())
            .collect()
    }

    pub fn exclude(&self) -> &[Expr] {
        &self.exclude
    }

    pub fn parse(&self, text: &str) -> Result<Expr> {
        parse(text, self)
    }

    /// Same coordinates, in the same order.
    pub fn compatible(&self, other: &Chart) -> bool {
        self.coords == other.coords
    }
}
