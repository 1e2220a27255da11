use std::fmt;

use super::poly::Monomial;

/// Dense variable index into a [`VarTable`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub u32);

impl VarId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sort {
    Int,
    Real,
    Bool,
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Int => f.write_str("Int"),
            Sort::Real => f.write_str("Real"),
            Sort::Bool => f.write_str("Bool"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SlackKind {
    LowerSlack,
    UpperSlack,
}

/// Why a variable exists.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum VarOrigin {
    /// Declared in the input.
    Original,
    /// Fresh variable standing for a non-linear monomial.
    MonomialAbstraction(Monomial),
    /// Motzkin multiplier of a universally quantified clause.
    Multiplier,
    /// Distance slack of the OMT relaxation cost.
    CostSlack { kind: SlackKind, of: VarId },
    /// The OMT cost variable itself.
    CostTotal,
    /// Indicator `p_S` of a transformed soft clause.
    SoftIndicator(u32),
    /// Bool introduced by Tseitin naming or by the engines.
    Auxiliary,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarInfo {
    pub name: String,
    pub sort: Sort,
    pub origin: VarOrigin,
}

/// Append-only table of variables; ids are assigned in insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarTable {
    vars: Vec<VarInfo>,
}

impl VarTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, sort: Sort, origin: VarOrigin) -> VarId {
        let id = VarId(self.vars.len() as u32);
        self.vars.push(VarInfo {
            name: name.into(),
            sort,
            origin,
        });
        id
    }

    pub fn add_original(&mut self, name: impl Into<String>, sort: Sort) -> VarId {
        self.add(name, sort, VarOrigin::Original)
    }

    /// Adds a fresh variable whose name is derived from `prefix` and its id.
    pub fn fresh(&mut self, prefix: &str, sort: Sort, origin: VarOrigin) -> VarId {
        let name = format!("{}!{}", prefix, self.vars.len());
        self.add(name, sort, origin)
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn info(&self, v: VarId) -> &VarInfo {
        &self.vars[v.index()]
    }

    pub fn sort(&self, v: VarId) -> Sort {
        self.vars[v.index()].sort
    }

    pub fn name(&self, v: VarId) -> &str {
        &self.vars[v.index()].name
    }

    pub fn is_int(&self, v: VarId) -> bool {
        self.sort(v) == Sort::Int
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.vars
            .iter()
            .position(|info| info.name == name)
            .map(|i| VarId(i as u32))
    }

    pub fn ids(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.vars.len()).map(|i| VarId(i as u32))
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &VarInfo)> + '_ {
        self.vars
            .iter()
            .enumerate()
            .map(|(i, info)| (VarId(i as u32), info))
    }
}
