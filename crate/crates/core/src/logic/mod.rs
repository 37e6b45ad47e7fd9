//! Statement semantics and the solver boundary.
//!
//! [`Logic`] answers the questions the rest of the verifier asks about statements: Hoare
//! triple validity (cached), trace feasibility, commutation, and interpolant sequences.
//! Every answer that is not a definite `unsat` is treated as "not proven".

pub mod interpolate;
pub mod linear;
pub mod semantics;
pub mod sexp;
pub mod smt;
pub mod term;

use std::collections::{BTreeSet, HashMap};
use std::sync::{Mutex, OnceLock};
use std::time::Duration;

use crate::error::{Error, Result};
use crate::frontend::Alphabet;
use interpolate::{at_version, ssa, strip_versions, Dialect};
use linear::normalize;
use semantics::TransitionFormula;
use smt::{SatResult, SolverConfig, SolverPool};
use term::{Term, Vocab};

/// Per-query solver budgets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Timeouts {
    pub query: Duration,
    pub feasibility: Duration,
}

impl Default for Timeouts {
    fn default() -> Self {
        Timeouts { query: Duration::from_secs(10), feasibility: Duration::from_secs(30) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    /// Values of the SSA variables, as `(name, value)` pairs in solver syntax.
    Feasible(Vec<(String, String)>),
    Infeasible,
    Unknown,
}

/// Semantics of an alphabet plus solver access.
pub struct Logic {
    vocab: Vocab,
    sems: Vec<OnceLock<TransitionFormula>>,
    markers: Vec<Option<(usize, usize)>>,
    base: Vec<TransitionFormula>,
    pool: SolverPool,
    interpolator: Option<(SolverPool, Dialect)>,
    cache: Mutex<HashMap<(Term, usize, Term), bool>>,
    caching: bool,
    pub timeouts: Timeouts,
    pub strength: interpolate::Strength,
}

impl Logic {
    pub fn new(alphabet: &Alphabet, solver: SolverConfig) -> Self {
        let n = alphabet.program_letters;
        let base = (0..n).map(|a| alphabet.semantics_of(a)).collect();
        let markers = (0..alphabet.len()).map(|id| alphabet.marker_pair(id)).collect();
        Self::from_parts(alphabet.vocab.clone(), base, markers, solver)
    }

    /// A logic over explicit program-letter semantics; markers for every ordered pair follow
    /// the same numbering as [`Alphabet::marker`].
    pub fn from_semantics(vocab: Vocab, base: Vec<TransitionFormula>, solver: SolverConfig) -> Self {
        let n = base.len();
        let mut markers = vec![None; n];
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    markers.push(Some((a, b)));
                }
            }
        }
        Self::from_parts(vocab, base, markers, solver)
    }

    fn from_parts(vocab: Vocab, base: Vec<TransitionFormula>, markers: Vec<Option<(usize, usize)>>, solver: SolverConfig) -> Self {
        Logic {
            vocab,
            sems: (0..markers.len()).map(|_| OnceLock::new()).collect(),
            markers,
            base,
            pool: SolverPool::new(solver),
            interpolator: None,
            cache: Mutex::new(HashMap::new()),
            caching: true,
            timeouts: Timeouts::default(),
            strength: interpolate::Strength::default(),
        }
    }

    /// Routes interpolation through an external solver speaking `dialect`.
    pub fn with_interpolator(mut self, cfg: SolverConfig, dialect: Dialect) -> Self {
        self.interpolator = Some((SolverPool::new(cfg), dialect));
        self
    }

    pub fn set_caching(&mut self, on: bool) {
        self.caching = on;
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn letters(&self) -> usize {
        self.sems.len()
    }

    pub fn pool(&self) -> &SolverPool {
        &self.pool
    }

    pub fn solver_calls(&self) -> u64 {
        self.pool.stats.queries() + self.interpolator.as_ref().map_or(0, |(p, _)| p.stats.queries())
    }

    /// Transition formula of letter `a`; marker formulas are built on first use.
    pub fn semantics(&self, a: usize) -> &TransitionFormula {
        if a < self.base.len() {
            return &self.base[a];
        }
        self.sems[a].get_or_init(|| {
            let (x, y) = self.markers[a].expect("letter is neither a statement nor a marker");
            TransitionFormula::marker(&self.base[x], &self.base[y])
        })
    }

    fn unsat(&self, parts: &[Term], timeout: Duration) -> Result<bool> {
        let conj = Term::and(parts.iter().cloned());
        if conj.is_false() {
            return Ok(true);
        }
        match self.pool.check(&self.vocab, &[conj], timeout) {
            Ok(r) => Ok(r == SatResult::Unsat),
            Err(Error::SolverTimeout(_)) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// Whether `φ ∧ ⟦a⟧ ⟹ ψ′` is valid. Timeouts and `unknown` count as invalid.
    pub fn hoare_valid(&self, phi: &Term, a: usize, psi: &Term) -> Result<bool> {
        let phi = normalize(phi, &self.vocab);
        let psi = normalize(psi, &self.vocab);
        if psi.is_true() || phi.is_false() {
            return Ok(true);
        }
        let tf = self.semantics(a);
        if phi == psi && psi.vars().iter().all(|v| !tf.update.contains_key(v)) {
            return Ok(true);
        }
        let key = (phi, a, psi);
        if self.caching {
            if let Some(r) = self.cache.lock().unwrap().get(&key) {
                return Ok(*r);
            }
        }
        let (phi, _, psi) = &key;
        let r = self.unsat(&[phi.clone(), tf.guard.clone(), Term::not(tf.post_image(psi))], self.timeouts.query)?;
        if self.caching {
            self.cache.lock().unwrap().insert(key, r);
        }
        Ok(r)
    }

    /// [`Logic::hoare_valid`] for many postconditions, sharing one solver round trip.
    pub fn hoare_many(&self, phi: &Term, a: usize, psis: &[&Term]) -> Result<Vec<bool>> {
        let phi = normalize(phi, &self.vocab);
        let tf = self.semantics(a);
        let mut out = vec![false; psis.len()];
        let mut pending = Vec::new();
        for (i, psi) in psis.iter().enumerate() {
            let psi = normalize(psi, &self.vocab);
            if psi.is_true() || phi.is_false() || (phi == psi && psi.vars().iter().all(|v| !tf.update.contains_key(v))) {
                out[i] = true;
                continue;
            }
            let key = (phi.clone(), a, psi);
            if self.caching {
                if let Some(r) = self.cache.lock().unwrap().get(&key) {
                    out[i] = *r;
                    continue;
                }
            }
            pending.push((i, key));
        }
        if pending.is_empty() {
            return Ok(out);
        }
        let queries: Vec<Vec<Term>> = pending
            .iter()
            .map(|(_, (phi, _, psi))| vec![phi.clone(), tf.guard.clone(), Term::not(tf.post_image(psi))])
            .collect();
        let answers = match self.pool.check_many(&self.vocab, &queries, self.timeouts.query) {
            Ok(ans) => ans,
            Err(Error::SolverTimeout(_)) => {
                // one slow query spoils the batch; ask individually
                let mut ans = Vec::new();
                for (_, (phi, _, psi)) in &pending {
                    ans.push(if self.hoare_valid(phi, a, psi)? { SatResult::Unsat } else { SatResult::Unknown });
                }
                ans
            }
            Err(e) => return Err(e),
        };
        let mut cache = self.cache.lock().unwrap();
        for ((i, key), ans) in pending.into_iter().zip(answers) {
            let r = ans == SatResult::Unsat;
            out[i] = r;
            if self.caching {
                cache.insert(key, r);
            }
        }
        Ok(out)
    }

    /// [`Logic::blocks`] for many letters in one solver round trip.
    pub fn blocks_many(&self, phi: &Term, letters: &[usize]) -> Result<Vec<bool>> {
        let phi = normalize(phi, &self.vocab);
        let fls = Term::Bool(false);
        let mut out = vec![false; letters.len()];
        let mut pending = Vec::new();
        for (i, &a) in letters.iter().enumerate() {
            if phi.is_false() {
                out[i] = true;
                continue;
            }
            let key = (phi.clone(), a, fls.clone());
            if self.caching {
                if let Some(r) = self.cache.lock().unwrap().get(&key) {
                    out[i] = *r;
                    continue;
                }
            }
            pending.push((i, key));
        }
        if pending.is_empty() {
            return Ok(out);
        }
        let queries: Vec<Vec<Term>> =
            pending.iter().map(|(_, (phi, a, _))| vec![phi.clone(), self.semantics(*a).guard.clone()]).collect();
        let answers = match self.pool.check_many(&self.vocab, &queries, self.timeouts.query) {
            Ok(ans) => ans,
            Err(Error::SolverTimeout(_)) => {
                let mut ans = Vec::new();
                for (_, (phi, a, _)) in &pending {
                    ans.push(if self.hoare_valid(phi, *a, &fls)? { SatResult::Unsat } else { SatResult::Unknown });
                }
                ans
            }
            Err(e) => return Err(e),
        };
        let mut cache = self.cache.lock().unwrap();
        for ((i, key), ans) in pending.into_iter().zip(answers) {
            let r = ans == SatResult::Unsat;
            out[i] = r;
            if self.caching {
                cache.insert(key, r);
            }
        }
        Ok(out)
    }

    /// Whether a state satisfying `φ` can take letter `a` at all.
    pub fn blocks(&self, phi: &Term, a: usize) -> Result<bool> {
        self.hoare_valid(phi, a, &Term::Bool(false))
    }

    /// `⟦ab⟧ ⊆ ⟦ba⟧` everywhere, i.e. the marker `indep_{a,b}` is infeasible from `true`.
    pub fn commutes(&self, marker: usize) -> Result<bool> {
        self.blocks(&Term::Bool(true), marker)
    }

    pub fn is_sat(&self, t: &Term) -> Result<SatResult> {
        self.pool.check(&self.vocab, &[t.clone()], self.timeouts.query)
    }

    /// `a ⟹ b` proven valid.
    pub fn implies(&self, a: &Term, b: &Term) -> Result<bool> {
        self.unsat(&[a.clone(), Term::not(b.clone())], self.timeouts.query)
    }

    /// SSA unrolling of a word.
    pub fn ssa(&self, word: &[usize]) -> interpolate::Ssa {
        let steps: Vec<&TransitionFormula> = word.iter().map(|&a| self.semantics(a)).collect();
        ssa(&self.vocab, &steps)
    }

    pub fn feasible(&self, word: &[usize]) -> Result<Feasibility> {
        let s = self.ssa(word);
        let conj = Term::and(s.constraints.iter().cloned());
        let mut names = BTreeSet::new();
        conj.collect_vars(&mut names);
        for (v, k) in s.versions.last().into_iter().flatten() {
            names.insert(format!("{v}.{k}"));
        }
        if conj.is_false() {
            return Ok(Feasibility::Infeasible);
        }
        let values: Vec<Term> = names.into_iter().map(Term::Var).collect();
        match self.pool.check_values(&self.vocab, &[conj], &values, self.timeouts.feasibility) {
            Ok((SatResult::Sat, model)) => Ok(Feasibility::Feasible(model)),
            Ok((SatResult::Unsat, _)) => Ok(Feasibility::Infeasible),
            Ok((SatResult::Unknown, _)) | Err(Error::SolverTimeout(_)) => Ok(Feasibility::Unknown),
            Err(e) => Err(e),
        }
    }

    /// Inductive assertion sequence `true = φ₀, …, φₙ = false` for an infeasible word with
    /// `{φᵢ} wᵢ {φᵢ₊₁}` valid for every `i`. The chain is re-validated before it is returned.
    pub fn interpolate(&self, word: &[usize]) -> Result<Vec<Term>> {
        let seq = match &self.interpolator {
            Some((pool, dialect)) => self.external_sequence(pool, *dialect, word)?,
            None => self.farkas_sequence(word)?,
        };
        for (i, &a) in word.iter().enumerate() {
            if !self.hoare_valid(&seq[i], a, &seq[i + 1])? {
                return Err(Error::Interpolation(format!(
                    "assertion chain broken at position {i}: {{{}}} {} {{{}}}",
                    seq[i].pretty(),
                    a,
                    seq[i + 1].pretty()
                )));
            }
        }
        Ok(seq)
    }

    fn farkas_sequence(&self, word: &[usize]) -> Result<Vec<Term>> {
        let s = self.ssa(word);
        let n = word.len();
        let mut seq = vec![Term::Bool(true)];
        for i in 0..n {
            let prev = &seq[i];
            if prev.is_false() {
                seq.push(Term::Bool(false));
                continue;
            }
            let a = Term::and([at_version(prev, &self.vocab, &s.versions[i]), s.constraints[i].clone()]);
            if i + 1 == n {
                seq.push(Term::Bool(false));
                continue;
            }
            let b = Term::and(s.constraints[i + 1..].iter().cloned());
            let t = self.query_timeout();
            let itp = match interpolate::farkas(&self.pool, &self.vocab, &a, &b, self.strength, t)? {
                Some(itp) => itp,
                None => {
                    let keep: BTreeSet<String> = s.versions[i + 1].iter().map(|(v, k)| format!("{v}.{k}")).collect();
                    interpolate::project(&self.pool, &self.vocab, &a, &keep, t)?.ok_or_else(|| {
                        Error::Interpolation(format!("no interpolant at position {i}"))
                    })?
                }
            };
            seq.push(normalize(&strip_versions(&itp), &self.vocab));
        }
        Ok(seq)
    }

    fn external_sequence(&self, pool: &SolverPool, dialect: Dialect, word: &[usize]) -> Result<Vec<Term>> {
        let s = self.ssa(word);
        let script = dialect.script(&self.vocab, &s.constraints);
        let out = pool.run(&script, self.timeouts.feasibility)?;
        let inner = dialect.parse(&out, word.len().saturating_sub(1)).map_err(Error::Interpolation)?;
        let mut seq = vec![Term::Bool(true)];
        seq.extend(inner.iter().map(|t| normalize(&strip_versions(t), &self.vocab)));
        seq.push(Term::Bool(false));
        Ok(seq)
    }

    fn query_timeout(&self) -> Duration {
        self.timeouts.query
    }
}
