//! Constraint intermediate representation and CNF lowering.
//!
//! Builders emit [`Constraint`] values; [`lower_into`] turns them into
//! clauses. Plain clauses pass through untouched, exactly-one uses the
//! pairwise encoding up to width 8 and a ladder above, cardinality bounds
//! use a sequential counter, and general formulas go through a structural
//! (Tseitin) transformation with hash-consing so shared subformulas share
//! their auxiliary variable.

use std::collections::HashMap;

use crate::cnf::{Cnf, Lit};

/// A Boolean formula over existing literals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Lit(Lit),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn lit(l: Lit) -> Formula {
        Formula::Lit(l)
    }

    pub fn and(parts: Vec<Formula>) -> Formula {
        Formula::And(parts)
    }

    pub fn or(parts: Vec<Formula>) -> Formula {
        Formula::Or(parts)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(p: Formula, q: Formula) -> Formula {
        Formula::Implies(Box::new(p), Box::new(q))
    }

    pub fn iff(p: Formula, q: Formula) -> Formula {
        Formula::Iff(Box::new(p), Box::new(q))
    }
}

/// One constraint to lower into CNF.
#[derive(Clone, Debug)]
pub enum Constraint {
    Clause(Vec<Lit>),
    AtMostOne(Vec<Lit>),
    ExactlyOne(Vec<Lit>),
    /// At least `k` of the literals are true.
    AtLeastK { lits: Vec<Lit>, k: usize },
    Formula(Formula),
}

/// Negation-normalized formula with constants folded away.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Norm {
    Lit(Lit),
    And(Vec<Norm>),
    Or(Vec<Norm>),
}

#[derive(Clone, Debug)]
enum Folded {
    True,
    False,
    F(Norm),
}

fn normalize(f: &Formula, negate: bool) -> Folded {
    match f {
        Formula::Lit(l) => Folded::F(Norm::Lit(if negate { !*l } else { *l })),
        Formula::Not(g) => normalize(g, !negate),
        Formula::And(parts) => {
            if negate {
                fold_or(parts.iter().map(|p| normalize(p, true)))
            } else {
                fold_and(parts.iter().map(|p| normalize(p, false)))
            }
        }
        Formula::Or(parts) => {
            if negate {
                fold_and(parts.iter().map(|p| normalize(p, true)))
            } else {
                fold_or(parts.iter().map(|p| normalize(p, false)))
            }
        }
        Formula::Implies(p, q) => {
            // p -> q  ==  !p || q
            if negate {
                fold_and([normalize(p, false), normalize(q, true)].into_iter())
            } else {
                fold_or([normalize(p, true), normalize(q, false)].into_iter())
            }
        }
        Formula::Iff(p, q) => {
            // p <-> q  ==  (p && q) || (!p && !q); negated it is the xor.
            let pp = normalize(p, false);
            let pn = normalize(p, true);
            let qp = normalize(q, false);
            let qn = normalize(q, true);
            if negate {
                fold_or(
                    [
                        fold_and([pp, qn].into_iter()),
                        fold_and([pn, qp].into_iter()),
                    ]
                    .into_iter(),
                )
            } else {
                fold_or(
                    [
                        fold_and([pp, qp].into_iter()),
                        fold_and([pn, qn].into_iter()),
                    ]
                    .into_iter(),
                )
            }
        }
    }
}

fn fold_and(parts: impl Iterator<Item = Folded>) -> Folded {
    let mut children: Vec<Norm> = Vec::new();
    for part in parts {
        match part {
            Folded::False => return Folded::False,
            Folded::True => {}
            Folded::F(Norm::And(inner)) => {
                for c in inner {
                    if !children.contains(&c) {
                        children.push(c);
                    }
                }
            }
            Folded::F(n) => {
                if !children.contains(&n) {
                    children.push(n);
                }
            }
        }
    }
    // Complementary literals make the conjunction false.
    for c in &children {
        if let Norm::Lit(l) = c {
            if children.contains(&Norm::Lit(!*l)) {
                return Folded::False;
            }
        }
    }
    match children.len() {
        0 => Folded::True,
        1 => Folded::F(children.pop().expect("one child")),
        _ => Folded::F(Norm::And(children)),
    }
}

fn fold_or(parts: impl Iterator<Item = Folded>) -> Folded {
    let mut children: Vec<Norm> = Vec::new();
    for part in parts {
        match part {
            Folded::True => return Folded::True,
            Folded::False => {}
            Folded::F(Norm::Or(inner)) => {
                for c in inner {
                    if !children.contains(&c) {
                        children.push(c);
                    }
                }
            }
            Folded::F(n) => {
                if !children.contains(&n) {
                    children.push(n);
                }
            }
        }
    }
    for c in &children {
        if let Norm::Lit(l) = c {
            if children.contains(&Norm::Lit(!*l)) {
                return Folded::True;
            }
        }
    }
    match children.len() {
        0 => Folded::False,
        1 => Folded::F(children.pop().expect("one child")),
        _ => Folded::F(Norm::Or(children)),
    }
}

/// Lowers `constraints` into `cnf`, allocating auxiliary variables as
/// needed. Auxiliary ids are appended after the already-declared ones.
pub fn lower_into(cnf: &mut Cnf, constraints: &[Constraint]) {
    let mut ctx = Lowering {
        cnf,
        memo: HashMap::new(),
    };
    for c in constraints {
        ctx.lower(c);
    }
}

struct Lowering<'a> {
    cnf: &'a mut Cnf,
    memo: HashMap<Norm, Lit>,
}

impl Lowering<'_> {
    fn lower(&mut self, c: &Constraint) {
        match c {
            Constraint::Clause(lits) => self.cnf.add_clause(lits.clone()),
            Constraint::AtMostOne(lits) => self.at_most_one(lits),
            Constraint::ExactlyOne(lits) => {
                assert!(!lits.is_empty(), "exactly-one over no literals");
                self.cnf.add_clause(lits.clone());
                self.at_most_one(lits);
            }
            Constraint::AtLeastK { lits, k } => self.at_least_k(lits, *k),
            Constraint::Formula(f) => self.assert_formula(f),
        }
    }

    fn at_most_one(&mut self, lits: &[Lit]) {
        if lits.len() <= 1 {
            return;
        }
        if lits.len() <= 8 {
            for (idx, &a) in lits.iter().enumerate() {
                for &b in &lits[idx + 1..] {
                    self.cnf.add_clause(vec![!a, !b]);
                }
            }
            return;
        }
        // Ladder: s_i means "one of the first i+1 literals is true".
        let n = lits.len();
        let ladder: Vec<Lit> = (0..n - 1)
            .map(|_| Lit::positive(self.cnf.fresh_var()))
            .collect();
        for i in 0..n - 1 {
            self.cnf.add_clause(vec![!lits[i], ladder[i]]);
            if i > 0 {
                self.cnf.add_clause(vec![!ladder[i - 1], ladder[i]]);
            }
        }
        for i in 1..n {
            self.cnf.add_clause(vec![!lits[i], !ladder[i - 1]]);
        }
    }

    /// Sequential-counter bound: at least `k` of `lits` are true, encoded
    /// as "at most n-k of the negations are true".
    fn at_least_k(&mut self, lits: &[Lit], k: usize) {
        assert!(k <= lits.len(), "bound {} exceeds {} literals", k, lits.len());
        if k == 0 {
            return;
        }
        if k == lits.len() {
            for &l in lits {
                self.cnf.add_clause(vec![l]);
            }
            return;
        }
        let ys: Vec<Lit> = lits.iter().map(|&l| !l).collect();
        self.sinz_at_most(&ys, lits.len() - k);
    }

    fn sinz_at_most(&mut self, ys: &[Lit], k: usize) {
        let n = ys.len();
        debug_assert!(k >= 1 && k < n);
        // registers[i][j]: at least j+1 of the first i+1 inputs are true.
        let mut registers = Vec::with_capacity(n - 1);
        for _ in 0..n - 1 {
            let row: Vec<Lit> = (0..k)
                .map(|_| Lit::positive(self.cnf.fresh_var()))
                .collect();
            registers.push(row);
        }
        self.cnf.add_clause(vec![!ys[0], registers[0][0]]);
        for j in 1..k {
            self.cnf.add_clause(vec![!registers[0][j]]);
        }
        for i in 1..n - 1 {
            self.cnf.add_clause(vec![!ys[i], registers[i][0]]);
            self.cnf
                .add_clause(vec![!registers[i - 1][0], registers[i][0]]);
            for j in 1..k {
                self.cnf.add_clause(vec![
                    !ys[i],
                    !registers[i - 1][j - 1],
                    registers[i][j],
                ]);
                self.cnf
                    .add_clause(vec![!registers[i - 1][j], registers[i][j]]);
            }
            self.cnf.add_clause(vec![!ys[i], !registers[i - 1][k - 1]]);
        }
        self.cnf
            .add_clause(vec![!ys[n - 1], !registers[n - 2][k - 1]]);
    }

    fn assert_formula(&mut self, f: &Formula) {
        // A definition of an existing variable avoids one auxiliary.
        if let Formula::Iff(lhs, rhs) = f {
            if let Folded::F(Norm::Lit(target)) = normalize(lhs, false) {
                let folded = normalize(rhs, false);
                self.define_equiv(target, folded);
                return;
            }
            if let Folded::F(Norm::Lit(target)) = normalize(rhs, false) {
                let folded = normalize(lhs, false);
                self.define_equiv(target, folded);
                return;
            }
        }
        let folded = normalize(f, false);
        self.assert_folded(folded);
    }

    fn assert_folded(&mut self, folded: Folded) {
        match folded {
            Folded::True => {}
            Folded::False => panic!("constraint is unsatisfiable by construction"),
            Folded::F(Norm::Lit(l)) => self.cnf.add_clause(vec![l]),
            Folded::F(Norm::And(parts)) => {
                for p in parts {
                    self.assert_folded(Folded::F(p));
                }
            }
            Folded::F(Norm::Or(parts)) => {
                let clause: Vec<Lit> = parts.iter().map(|p| self.name(p)).collect();
                self.cnf.add_clause(clause);
            }
        }
    }

    fn define_equiv(&mut self, target: Lit, folded: Folded) {
        match folded {
            Folded::True => self.cnf.add_clause(vec![target]),
            Folded::False => self.cnf.add_clause(vec![!target]),
            Folded::F(Norm::Lit(c)) => {
                self.cnf.add_clause(vec![!target, c]);
                self.cnf.add_clause(vec![target, !c]);
            }
            Folded::F(Norm::Or(parts)) => {
                let lits: Vec<Lit> = parts.iter().map(|p| self.name(p)).collect();
                let mut fwd = vec![!target];
                fwd.extend(&lits);
                self.cnf.add_clause(fwd);
                for c in lits {
                    self.cnf.add_clause(vec![!c, target]);
                }
            }
            Folded::F(Norm::And(parts)) => {
                let lits: Vec<Lit> = parts.iter().map(|p| self.name(p)).collect();
                for &c in &lits {
                    self.cnf.add_clause(vec![!target, c]);
                }
                let mut back = vec![target];
                back.extend(lits.iter().map(|&c| !c));
                self.cnf.add_clause(back);
            }
        }
    }

    /// Returns a literal equivalent to the normalized formula, introducing
    /// a defined auxiliary variable for non-literal nodes. Structurally
    /// identical subformulas share one definition.
    fn name(&mut self, n: &Norm) -> Lit {
        if let Norm::Lit(l) = n {
            return *l;
        }
        if let Some(&l) = self.memo.get(n) {
            return l;
        }
        let target = Lit::positive(self.cnf.fresh_var());
        match n {
            Norm::Lit(_) => unreachable!(),
            Norm::Or(parts) => {
                let lits: Vec<Lit> = parts.iter().map(|p| self.name(p)).collect();
                let mut fwd = vec![!target];
                fwd.extend(&lits);
                self.cnf.add_clause(fwd);
                for c in lits {
                    self.cnf.add_clause(vec![!c, target]);
                }
            }
            Norm::And(parts) => {
                let lits: Vec<Lit> = parts.iter().map(|p| self.name(p)).collect();
                for &c in &lits {
                    self.cnf.add_clause(vec![!target, c]);
                }
                let mut back = vec![target];
                back.extend(lits.iter().map(|&c| !c));
                self.cnf.add_clause(back);
            }
        }
        self.memo.insert(n.clone(), target);
        target
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Var;

    fn pos(v: u32) -> Lit {
        Lit::positive(Var(v))
    }

    fn lower_one(num_vars: u32, c: Constraint) -> Cnf {
        let mut cnf = Cnf::new(num_vars);
        lower_into(&mut cnf, &[c]);
        cnf
    }

    #[test]
    fn plain_disjunction_passes_through() {
        let f = Formula::or(vec![Formula::lit(pos(1)), Formula::lit(pos(2))]);
        let cnf = lower_one(2, Constraint::Formula(f));
        assert_eq!(cnf.num_vars(), 2);
        assert_eq!(cnf.clauses(), &[vec![pos(1), pos(2)]]);
    }

    #[test]
    fn exactly_one_of_three_is_pairwise() {
        let cnf = lower_one(3, Constraint::ExactlyOne(vec![pos(1), pos(2), pos(3)]));
        assert_eq!(cnf.num_vars(), 3);
        assert_eq!(cnf.num_clauses(), 4);
        assert_eq!(cnf.clauses()[0], vec![pos(1), pos(2), pos(3)]);
        assert!(cnf.clauses()[1..].iter().all(|c| c.len() == 2));
    }

    #[test]
    fn wide_exactly_one_uses_ladder() {
        let lits: Vec<Lit> = (1..=10).map(pos).collect();
        let cnf = lower_one(10, Constraint::ExactlyOne(lits));
        assert_eq!(cnf.num_vars(), 19);
    }

    #[test]
    fn at_least_k_edge_cases() {
        let lits: Vec<Lit> = (1..=4).map(pos).collect();
        let cnf = lower_one(4, Constraint::AtLeastK { lits: lits.clone(), k: 0 });
        assert_eq!(cnf.num_clauses(), 0);

        let cnf = lower_one(4, Constraint::AtLeastK { lits, k: 4 });
        assert_eq!(cnf.num_clauses(), 4);
        assert!(cnf.clauses().iter().all(|c| c.len() == 1));
    }

    #[test]
    fn implication_becomes_clause() {
        let f = Formula::implies(Formula::lit(pos(1)), Formula::lit(pos(2)));
        let cnf = lower_one(2, Constraint::Formula(f));
        assert_eq!(cnf.clauses(), &[vec![!pos(1), pos(2)]]);
    }

    #[test]
    fn implication_to_empty_or_forces_negation() {
        let f = Formula::implies(Formula::lit(pos(1)), Formula::or(vec![]));
        let cnf = lower_one(1, Constraint::Formula(f));
        assert_eq!(cnf.clauses(), &[vec![!pos(1)]]);
    }

    #[test]
    fn iff_with_lit_lhs_reuses_the_variable() {
        // v3 <-> (v1 && v2): three clauses, no auxiliary.
        let f = Formula::iff(
            Formula::lit(pos(3)),
            Formula::and(vec![Formula::lit(pos(1)), Formula::lit(pos(2))]),
        );
        let cnf = lower_one(3, Constraint::Formula(f));
        assert_eq!(cnf.num_vars(), 3);
        assert_eq!(cnf.num_clauses(), 3);
    }

    #[test]
    fn shared_subformulas_share_auxiliaries() {
        let conj = Formula::and(vec![Formula::lit(pos(1)), Formula::lit(pos(2))]);
        let f1 = Formula::or(vec![conj.clone(), Formula::lit(pos(3))]);
        let f2 = Formula::or(vec![conj, Formula::lit(pos(4))]);
        let mut cnf = Cnf::new(4);
        lower_into(
            &mut cnf,
            &[Constraint::Formula(f1), Constraint::Formula(f2)],
        );
        // One auxiliary for the shared conjunction, none for the top ors.
        assert_eq!(cnf.num_vars(), 5);
    }

    #[test]
    fn constant_true_emits_nothing() {
        let f = Formula::or(vec![Formula::lit(pos(1)), Formula::not(Formula::lit(pos(1)))]);
        let cnf = lower_one(1, Constraint::Formula(f));
        assert_eq!(cnf.num_clauses(), 0);
    }
}
