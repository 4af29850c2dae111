//! Guard expressions and assignment lists over the shared valuation.
//!
//! Guards are quantifier-free: existential conditions over neighbor cells are
//! expanded into finite disjunctions when the models are built, so evaluation
//! is total and trivial. An assignment that would leave a variable's domain
//! does not clamp or fail at run time; it makes the whole transition
//! undefined, i.e. disabled.

use crate::vars::{Valuation, VarId, VariableTable};

/// Integer operand: a constant, a variable, or a variable plus an offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Operand {
    pub var: Option<VarId>,
    pub offset: i32,
}

impl Operand {
    pub fn constant(value: i32) -> Self {
        Operand {
            var: None,
            offset: value,
        }
    }

    pub fn var(id: VarId) -> Self {
        Operand {
            var: Some(id),
            offset: 0,
        }
    }

    pub fn var_plus(id: VarId, offset: i32) -> Self {
        Operand {
            var: Some(id),
            offset,
        }
    }

    pub fn eval(&self, v: &Valuation) -> i32 {
        self.offset + self.var.map_or(0, |id| v.get(id))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GuardExpr {
    True,
    Cmp(Operand, Cmp, Operand),
    Not(Box<GuardExpr>),
    And(Vec<GuardExpr>),
    Or(Vec<GuardExpr>),
    Xor(Box<GuardExpr>, Box<GuardExpr>),
}

impl GuardExpr {
    pub fn cmp(lhs: Operand, op: Cmp, rhs: Operand) -> Self {
        GuardExpr::Cmp(lhs, op, rhs)
    }

    pub fn eq(lhs: Operand, rhs: Operand) -> Self {
        GuardExpr::Cmp(lhs, Cmp::Eq, rhs)
    }

    pub fn not(g: GuardExpr) -> Self {
        GuardExpr::Not(Box::new(g))
    }

    /// Conjunction; collapses the empty and singleton cases.
    pub fn all(mut gs: Vec<GuardExpr>) -> Self {
        gs.retain(|g| *g != GuardExpr::True);
        match gs.len() {
            0 => GuardExpr::True,
            1 => gs.pop().unwrap(),
            _ => GuardExpr::And(gs),
        }
    }

    /// Disjunction; `Or(vec![])` is unsatisfiable.
    pub fn any(mut gs: Vec<GuardExpr>) -> Self {
        match gs.len() {
            1 => gs.pop().unwrap(),
            _ => GuardExpr::Or(gs),
        }
    }

    /// `|lhs - rhs| <= bound`, as two comparisons.
    pub fn abs_diff_le(lhs: Operand, rhs: Operand, bound: i32) -> Self {
        GuardExpr::all(vec![
            GuardExpr::Cmp(
                lhs,
                Cmp::Le,
                Operand {
                    var: rhs.var,
                    offset: rhs.offset + bound,
                },
            ),
            GuardExpr::Cmp(
                rhs,
                Cmp::Le,
                Operand {
                    var: lhs.var,
                    offset: lhs.offset + bound,
                },
            ),
        ])
    }

    /// Largest variable id read by this guard, for build-time validation.
    pub fn max_var(&self) -> Option<VarId> {
        match self {
            GuardExpr::True => None,
            GuardExpr::Cmp(a, _, b) => a.var.max(b.var),
            GuardExpr::Not(g) => g.max_var(),
            GuardExpr::And(gs) | GuardExpr::Or(gs) => gs.iter().filter_map(|g| g.max_var()).max(),
            GuardExpr::Xor(a, b) => a.max_var().max(b.max_var()),
        }
    }
}

/// Standard boolean semantics; pure, total over total valuations.
pub fn eval_guard(g: &GuardExpr, v: &Valuation) -> bool {
    match g {
        GuardExpr::True => true,
        GuardExpr::Cmp(lhs, op, rhs) => {
            let (a, b) = (lhs.eval(v), rhs.eval(v));
            match op {
                Cmp::Eq => a == b,
                Cmp::Ne => a != b,
                Cmp::Lt => a < b,
                Cmp::Le => a <= b,
                Cmp::Gt => a > b,
                Cmp::Ge => a >= b,
            }
        }
        GuardExpr::Not(g) => !eval_guard(g, v),
        GuardExpr::And(gs) => gs.iter().all(|g| eval_guard(g, v)),
        GuardExpr::Or(gs) => gs.iter().any(|g| eval_guard(g, v)),
        GuardExpr::Xor(a, b) => eval_guard(a, v) ^ eval_guard(b, v),
    }
}

/// One assignment `var := operand`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Assign {
    pub var: VarId,
    pub value: Operand,
}

impl Assign {
    pub fn new(var: VarId, value: Operand) -> Self {
        Assign { var, value }
    }

    /// `var := var + delta`.
    pub fn increment(var: VarId, delta: i32) -> Self {
        Assign {
            var,
            value: Operand::var_plus(var, delta),
        }
    }

    /// `var := constant`.
    pub fn set_const(var: VarId, value: i32) -> Self {
        Assign {
            var,
            value: Operand::constant(value),
        }
    }
}

/// Ordered assignments, applied left to right.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActionList(pub Vec<Assign>);

impl ActionList {
    pub fn new(assigns: Vec<Assign>) -> Self {
        ActionList(assigns)
    }

    pub fn empty() -> Self {
        ActionList(Vec::new())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Variables this list assigns, used for write-conflict detection.
    pub fn assigned_vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.0.iter().map(|a| a.var)
    }

    pub fn max_var(&self) -> Option<VarId> {
        self.0
            .iter()
            .map(|a| a.var.max(a.value.var.unwrap_or(0)))
            .max()
    }
}

/// Applies the assignments in order. Returns `None` if any assignment leaves
/// the variable's domain; the caller then treats the transition as disabled.
pub fn apply_actions(
    actions: &ActionList,
    v: &Valuation,
    table: &VariableTable,
) -> Option<Valuation> {
    if actions.is_empty() {
        return Some(v.clone());
    }
    let mut out = v.clone();
    for assign in &actions.0 {
        let value = assign.value.eval(&out);
        if !table.in_domain(assign.var, value) {
            return None;
        }
        out.set(assign.var, value);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vars::VariableTable;

    fn table() -> (VariableTable, VarId) {
        let mut t = VariableTable::new();
        let h = t.add("h(1,1)", 0, 2, 0).unwrap();
        (t, h)
    }

    #[test]
    fn literal_true_holds_everywhere() {
        let (t, _) = table();
        assert!(eval_guard(&GuardExpr::True, &t.initial_valuation()));
    }

    #[test]
    fn direct_comparison() {
        let (t, h) = table();
        let g = GuardExpr::eq(Operand::var(h), Operand::constant(0));
        let mut v = t.initial_valuation();
        assert!(eval_guard(&g, &v));
        v.set(h, 1);
        assert!(!eval_guard(&g, &v));
    }

    #[test]
    fn xor_and_not() {
        let (t, h) = table();
        let v = t.initial_valuation();
        let yes = GuardExpr::True;
        let no = GuardExpr::not(GuardExpr::True);
        assert!(!eval_guard(&no, &v));
        assert!(eval_guard(
            &GuardExpr::Xor(Box::new(yes.clone()), Box::new(no.clone())),
            &v
        ));
        assert!(!eval_guard(
            &GuardExpr::Xor(Box::new(yes.clone()), Box::new(yes)),
            &v
        ));
        let _ = h;
    }

    #[test]
    fn empty_disjunction_is_unsatisfiable() {
        let (t, _) = table();
        assert!(!eval_guard(&GuardExpr::any(vec![]), &t.initial_valuation()));
        assert!(eval_guard(&GuardExpr::all(vec![]), &t.initial_valuation()));
    }

    #[test]
    fn abs_diff_le_matches_abs() {
        let mut t = VariableTable::new();
        let a = t.add("a", 0, 3, 0).unwrap();
        let b = t.add("b", 0, 3, 0).unwrap();
        let g = GuardExpr::abs_diff_le(Operand::var(a), Operand::var(b), 1);
        let mut v = t.initial_valuation();
        for va in 0..=3 {
            for vb in 0..=3 {
                v.set(a, va);
                v.set(b, vb);
                assert_eq!(eval_guard(&g, &v), (va - vb).abs() <= 1, "{va} {vb}");
            }
        }
    }

    #[test]
    fn increment_within_domain() {
        let (t, h) = table();
        let acts = ActionList::new(vec![Assign::increment(h, 1)]);
        let v = t.initial_valuation();
        let v2 = apply_actions(&acts, &v, &t).unwrap();
        assert_eq!(v2.get(h), 1);
        // original untouched
        assert_eq!(v.get(h), 0);
    }

    #[test]
    fn empty_list_is_identity() {
        let (t, _) = table();
        let v = t.initial_valuation();
        assert_eq!(apply_actions(&ActionList::empty(), &v, &t).unwrap(), v);
    }

    #[test]
    fn domain_exit_disables() {
        let (t, h) = table();
        let acts = ActionList::new(vec![Assign::increment(h, 1)]);
        let mut v = t.initial_valuation();
        v.set(h, 2);
        assert!(apply_actions(&acts, &v, &t).is_none());
    }

    #[test]
    fn assignments_apply_left_to_right() {
        let mut t = VariableTable::new();
        let a = t.add("a", 0, 5, 1).unwrap();
        let b = t.add("b", 0, 5, 0).unwrap();
        // b := a + 1 ; a := 0 — b reads the pre-assignment a.
        let acts = ActionList::new(vec![
            Assign::new(b, Operand::var_plus(a, 1)),
            Assign::set_const(a, 0),
        ]);
        let v2 = apply_actions(&acts, &t.initial_valuation(), &t).unwrap();
        assert_eq!(v2.get(b), 2);
        assert_eq!(v2.get(a), 0);
    }
}
