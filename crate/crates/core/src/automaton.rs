//! Invertible letter-to-letter transducers and their action on the rooted tree `X*`.
//!
//! Letters are stored 0-based (`0..d`); the text formats use the 1-based digits
//! `1..=d`. State `0` is always the identity state `id`.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Index of a state inside a [`Transducer`].
pub type StateId = usize;

/// The identity state; present in every transducer.
pub const IDENTITY: StateId = 0;

/// A state together with a sign: either the generator itself or its formal inverse.
///
/// Packed as `2 * state + inverse` so that the derived ordering is
/// `a < a⁻¹ < b < b⁻¹ < …` in declaration order.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedState(u32);

impl SignedState {
    pub fn new(state: StateId, inverse: bool) -> Self {
        SignedState(((state as u32) << 1) | inverse as u32)
    }

    pub fn positive(state: StateId) -> Self {
        Self::new(state, false)
    }

    pub fn state(self) -> StateId {
        (self.0 >> 1) as StateId
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    #[must_use]
    pub fn inverse(self) -> Self {
        SignedState(self.0 ^ 1)
    }

    pub fn code(self) -> u32 {
        self.0
    }

    pub fn from_code(code: u32) -> Self {
        SignedState(code)
    }
}

impl fmt::Debug for SignedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "q{}{}",
            self.state(),
            if self.is_inverse() { "⁻" } else { "" }
        )
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("state `{state}`: output not a permutation")]
    NotPermutation { state: String },
    #[error("line {line}: undefined state `{name}`")]
    UndefinedState { line: usize, name: String },
    #[error("letter {letter} out of range for alphabet of size {size}")]
    LetterOutOfRange { letter: usize, size: usize },
    #[error("unknown builtin automaton `{0}`")]
    UnknownBuiltin(String),
    #[error("malformed parameter `{0}`: expected a word over {{0,1}}")]
    MalformedParameter(String),
}

/// A finite invertible transducer `(Q, X, λ, τ)`.
///
/// Immutable after construction; every constructor validates totality and the
/// bijectivity of each output row.
#[derive(Clone, PartialEq, Eq)]
pub struct Transducer {
    alphabet: usize,
    names: Vec<String>,
    output: Vec<Vec<u8>>,
    inverse_output: Vec<Vec<u8>>,
    transition: Vec<Vec<StateId>>,
    canonical: Vec<SignedState>,
}

/// Row of a transducer as supplied to [`Transducer::from_rows`]:
/// for each letter, the output letter and the target state.
pub type StateRow = Vec<(u8, StateId)>;

impl Transducer {
    /// Builds a transducer from named rows. The identity state is added as state 0
    /// and must not be included in `states`; targets refer to `0` for `id` and
    /// `i + 1` for `states[i]`.
    pub fn from_rows(
        alphabet: usize,
        states: Vec<(String, StateRow)>,
    ) -> Result<Self, AutomatonError> {
        let mut names = vec!["id".to_string()];
        let mut output = vec![(0..alphabet as u8).collect::<Vec<_>>()];
        let mut transition = vec![vec![IDENTITY; alphabet]];
        let count = states.len() + 1;
        for (name, row) in states {
            if row.len() != alphabet {
                return Err(AutomatonError::Syntax {
                    line: 0,
                    message: format!("state `{name}` has {} rows, expected {alphabet}", row.len()),
                });
            }
            let mut out = Vec::with_capacity(alphabet);
            let mut next = Vec::with_capacity(alphabet);
            for (y, q) in row {
                if y as usize >= alphabet {
                    return Err(AutomatonError::LetterOutOfRange {
                        letter: y as usize + 1,
                        size: alphabet,
                    });
                }
                if q >= count {
                    return Err(AutomatonError::UndefinedState {
                        line: 0,
                        name: format!("#{q}"),
                    });
                }
                out.push(y);
                next.push(q);
            }
            names.push(name);
            output.push(out);
            transition.push(next);
        }
        let mut inverse_output = Vec::with_capacity(output.len());
        for (q, row) in output.iter().enumerate() {
            let mut inv = vec![u8::MAX; alphabet];
            for (x, &y) in row.iter().enumerate() {
                if inv[y as usize] != u8::MAX {
                    return Err(AutomatonError::NotPermutation {
                        state: names[q].clone(),
                    });
                }
                inv[y as usize] = x as u8;
            }
            inverse_output.push(inv);
        }
        let mut t = Transducer {
            alphabet,
            names,
            output,
            inverse_output,
            transition,
            canonical: Vec::new(),
        };
        t.canonical = t.find_aliases();
        Ok(t)
    }

    /// For each state, the earliest signed state acting identically: `id` for
    /// trivially acting states, `p⁻¹` for a state that inverts an earlier `p`.
    fn find_aliases(&self) -> Vec<SignedState> {
        let n = self.state_count();
        let signed = 2 * n;
        let norm = |s: SignedState| {
            if s.state() == IDENTITY {
                0
            } else {
                s.code() as usize
            }
        };
        let mut inverse_pair = vec![vec![false; signed]; signed];
        for (i, row) in inverse_pair.iter_mut().enumerate() {
            let u = SignedState::from_code(i as u32);
            for (j, cell) in row.iter_mut().enumerate() {
                let v = SignedState::from_code(j as u32);
                *cell = (0..self.alphabet as u8).all(|x| self.step(v, self.step(u, x).0).0 == x);
            }
        }
        loop {
            let mut changed = false;
            for i in 0..signed {
                for j in 0..signed {
                    if !inverse_pair[i][j] {
                        continue;
                    }
                    let (u, v) = (
                        SignedState::from_code(i as u32),
                        SignedState::from_code(j as u32),
                    );
                    let ok = (0..self.alphabet as u8).all(|x| {
                        let (y, su) = self.step(u, x);
                        let (_, sv) = self.step(v, y);
                        inverse_pair[norm(su)][norm(sv)]
                    });
                    if !ok {
                        inverse_pair[i][j] = false;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        (0..n)
            .map(|q| {
                let me = SignedState::positive(q).code() as usize;
                if q == IDENTITY || inverse_pair[0][me] {
                    return SignedState::positive(IDENTITY);
                }
                (0..2 * q)
                    .find(|&c| c >= 2 && inverse_pair[c][me])
                    .map_or(SignedState::positive(q), |c| {
                        SignedState::from_code(c as u32).inverse()
                    })
            })
            .collect()
    }

    /// The representative of `s` among equal-acting signed states. States that
    /// act trivially map to `id` (state 0, positive).
    #[inline]
    pub fn canonical(&self, s: SignedState) -> SignedState {
        let c = self.canonical[s.state()];
        if s.is_inverse() && c.state() != IDENTITY {
            c.inverse()
        } else {
            c
        }
    }

    /// Non-identity states that are not aliases of earlier states; the natural
    /// generating set.
    pub fn primary_generators(&self) -> Vec<StateId> {
        self.generators()
            .filter(|&q| self.canonical[q] == SignedState::positive(q))
            .collect()
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet
    }

    /// Number of states including `id`.
    pub fn state_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, q: StateId) -> &str {
        &self.names[q]
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.names.iter().position(|n| n == name)
    }

    /// Non-identity states in declaration order.
    pub fn generators(&self) -> impl Iterator<Item = StateId> + '_ {
        1..self.names.len()
    }

    pub fn output(&self, q: StateId, x: u8) -> u8 {
        self.output[q][x as usize]
    }

    pub fn transition(&self, q: StateId, x: u8) -> StateId {
        self.transition[q][x as usize]
    }

    /// Root permutation of a signed state as an image table.
    pub fn root_permutation(&self, s: SignedState) -> &[u8] {
        if s.is_inverse() {
            &self.inverse_output[s.state()]
        } else {
            &self.output[s.state()]
        }
    }

    /// One step of the action: the image letter and the section at `x`.
    ///
    /// For a formal inverse, `τ(q⁻¹, x) = τ(q, λ(q,·)⁻¹(x))⁻¹`.
    #[inline]
    pub fn step(&self, s: SignedState, x: u8) -> (u8, SignedState) {
        let q = s.state();
        if s.is_inverse() {
            let y = self.inverse_output[q][x as usize];
            (y, SignedState::new(self.transition[q][y as usize], true))
        } else {
            (
                self.output[q][x as usize],
                SignedState::new(self.transition[q][x as usize], false),
            )
        }
    }

    /// Image of the vertex `v` (0-based letters) under `s`.
    pub fn apply_state(&self, s: SignedState, v: &[u8]) -> Result<Vec<u8>, AutomatonError> {
        self.check_vertex(v)?;
        let mut cur = s;
        let mut out = Vec::with_capacity(v.len());
        for &x in v {
            if cur.state() == IDENTITY {
                out.push(x);
                continue;
            }
            let (y, next) = self.step(cur, x);
            out.push(y);
            cur = next;
        }
        Ok(out)
    }

    /// Image of `v` under the product `s₁ s₂ … sₖ` (right action: `s₁` acts first).
    pub fn apply_word(&self, word: &[SignedState], v: &[u8]) -> Result<Vec<u8>, AutomatonError> {
        self.check_vertex(v)?;
        let mut out = v.to_vec();
        for &s in word {
            self.apply_in_place(s, &mut out);
        }
        Ok(out)
    }

    pub(crate) fn apply_in_place(&self, s: SignedState, v: &mut [u8]) {
        let mut cur = s;
        for x in v.iter_mut() {
            if cur.state() == IDENTITY {
                break;
            }
            let (y, next) = self.step(cur, *x);
            *x = y;
            cur = next;
        }
    }

    fn check_vertex(&self, v: &[u8]) -> Result<(), AutomatonError> {
        match v.iter().find(|&&x| x as usize >= self.alphabet) {
            Some(&x) => Err(AutomatonError::LetterOutOfRange {
                letter: x as usize + 1,
                size: self.alphabet,
            }),
            None => Ok(()),
        }
    }

    /// Structural report on the machine.
    pub fn validate(&self) -> ValidationReport {
        let invertible = self.output.iter().all(|row| {
            let mut seen = vec![false; self.alphabet];
            row.iter()
                .all(|&y| !std::mem::replace(&mut seen[y as usize], true))
        });
        ValidationReport {
            invertible,
            monomial: self.is_monomial(),
            dual_invertible: self.dual().is_invertible(),
        }
    }

    /// Each non-identity state occurs exactly once as a section of a non-identity
    /// state, every other section is trivial, and every root permutation is a
    /// power of the cycle `x ↦ x + 1 mod d`.
    fn is_monomial(&self) -> bool {
        let d = self.alphabet;
        let mut occurrences = vec![0usize; self.state_count()];
        for q in self.generators() {
            let row = &self.output[q];
            let shift = row[0] as usize;
            if (0..d).any(|x| row[x] as usize != (x + shift) % d) {
                return false;
            }
            for &next in &self.transition[q] {
                occurrences[next] += 1;
            }
        }
        self.generators().all(|q| occurrences[q] == 1)
    }

    /// The dual machine: letters become states and vice versa.
    pub fn dual(&self) -> DualAutomaton {
        let states = self.alphabet;
        let output = (0..states)
            .map(|x| {
                (0..self.state_count())
                    .map(|q| self.transition[q][x])
                    .collect()
            })
            .collect();
        let transition = (0..states)
            .map(|x| {
                (0..self.state_count())
                    .map(|q| self.output[q][x] as usize)
                    .collect()
            })
            .collect();
        DualAutomaton { output, transition }
    }

    /// Serialises to the line-based automaton file format.
    pub fn to_file_string(&self) -> String {
        let mut s = format!("alphabet {}\n", self.alphabet);
        for q in self.generators() {
            s.push_str(&format!("state {}\n", self.names[q]));
            for x in 0..self.alphabet {
                s.push_str(&format!(
                    "on {} -> {} goto {}\n",
                    format_letter(x as u8, self.alphabet),
                    format_letter(self.output[q][x], self.alphabet),
                    self.names[self.transition[q][x]]
                ));
            }
        }
        s
    }
}

impl fmt::Debug for Transducer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_file_string())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct ValidationReport {
    pub invertible: bool,
    pub monomial: bool,
    pub dual_invertible: bool,
}

/// A (not necessarily invertible) Mealy machine given by raw tables, as produced
/// by swapping the roles of states and letters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualAutomaton {
    /// `output[state][letter]`
    pub output: Vec<Vec<usize>>,
    /// `transition[state][letter]`
    pub transition: Vec<Vec<usize>>,
}

impl DualAutomaton {
    pub fn is_invertible(&self) -> bool {
        self.output.iter().all(|row| {
            let mut seen = vec![false; row.len()];
            row.iter()
                .all(|&y| y < seen.len() && !std::mem::replace(&mut seen[y], true))
        })
    }

    pub fn dual(&self) -> DualAutomaton {
        let states = self.output.first().map_or(0, Vec::len);
        let letters = self.output.len();
        DualAutomaton {
            output: (0..states)
                .map(|q| (0..letters).map(|x| self.transition[x][q]).collect())
                .collect(),
            transition: (0..states)
                .map(|q| (0..letters).map(|x| self.output[x][q]).collect())
                .collect(),
        }
    }
}

impl From<&Transducer> for DualAutomaton {
    fn from(t: &Transducer) -> Self {
        DualAutomaton {
            output: t
                .output
                .iter()
                .map(|r| r.iter().map(|&y| y as usize).collect())
                .collect(),
            transition: t.transition.clone(),
        }
    }
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A parsed `on` line: (line, output letter, target name).
type RawRow = (usize, u8, String);

/// Parses the automaton file format:
///
/// ```text
/// alphabet 2
/// state a
/// on 1 -> 2 goto b
/// on 2 -> 1 goto id
/// ```
pub fn parse_transducer(text: &str) -> Result<Transducer, AutomatonError> {
    let syntax = |line: usize, message: &str| AutomatonError::Syntax {
        line,
        message: message.to_string(),
    };
    let mut alphabet: Option<usize> = None;
    // (name, declaring line, rows: letter -> (line, out, target name))
    let mut blocks: Vec<(String, usize, Vec<Option<RawRow>>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens[0] {
            "alphabet" => {
                if alphabet.is_some() || tokens.len() != 2 {
                    return Err(syntax(line, "expected a single `alphabet <d>` line"));
                }
                let d: usize = tokens[1]
                    .parse()
                    .map_err(|_| syntax(line, "alphabet size must be an integer"))?;
                if !(2..=255).contains(&d) {
                    return Err(syntax(line, "alphabet size must be between 2 and 255"));
                }
                alphabet = Some(d);
            }
            "state" => {
                let d = alphabet.ok_or_else(|| syntax(line, "`state` before `alphabet`"))?;
                if tokens.len() != 2 || !valid_name(tokens[1]) {
                    return Err(syntax(line, "expected `state <name>`"));
                }
                let name = tokens[1];
                if name == "id" {
                    return Err(syntax(line, "`id` is reserved"));
                }
                if blocks.iter().any(|b| b.0 == name) {
                    return Err(syntax(line, &format!("duplicate state `{name}`")));
                }
                blocks.push((name.to_string(), line, vec![None; d]));
            }
            "on" => {
                let d = alphabet.ok_or_else(|| syntax(line, "`on` before `alphabet`"))?;
                let block = blocks
                    .last_mut()
                    .ok_or_else(|| syntax(line, "`on` outside a state block"))?;
                if tokens.len() != 6 || tokens[2] != "->" || tokens[4] != "goto" {
                    return Err(syntax(line, "expected `on <x> -> <y> goto <state>`"));
                }
                let x =
                    parse_letter(tokens[1], d).ok_or_else(|| syntax(line, "bad input letter"))?;
                let y =
                    parse_letter(tokens[3], d).ok_or_else(|| syntax(line, "bad output letter"))?;
                if block.2[x as usize].is_some() {
                    return Err(syntax(line, "letter defined twice"));
                }
                block.2[x as usize] = Some((line, y, tokens[5].to_string()));
            }
            _ => return Err(syntax(line, &format!("unexpected `{}`", tokens[0]))),
        }
    }
    let d =
        alphabet.ok_or_else(|| syntax(text.lines().count().max(1), "missing `alphabet` line"))?;
    let index: HashMap<&str, StateId> = blocks
        .iter()
        .enumerate()
        .map(|(i, b)| (b.0.as_str(), i + 1))
        .collect();
    let mut rows = Vec::with_capacity(blocks.len());
    for (name, decl_line, entries) in &blocks {
        let mut row = Vec::with_capacity(d);
        for (x, entry) in entries.iter().enumerate() {
            let (line, y, target) = entry.as_ref().ok_or_else(|| {
                syntax(
                    *decl_line,
                    &format!(
                        "state `{name}` missing letter {}",
                        format_letter(x as u8, d)
                    ),
                )
            })?;
            let q = if target == "id" {
                IDENTITY
            } else {
                *index
                    .get(target.as_str())
                    .ok_or_else(|| AutomatonError::UndefinedState {
                        line: *line,
                        name: target.clone(),
                    })?
            };
            row.push((*y, q));
        }
        rows.push((name.clone(), row));
    }
    Transducer::from_rows(d, rows)
}

/// Parses a 1-based letter (`1..=d`).
pub fn parse_letter(token: &str, d: usize) -> Option<u8> {
    let v: usize = token.parse().ok()?;
    (1..=d).contains(&v).then(|| (v - 1) as u8)
}

pub fn format_letter(x: u8, _d: usize) -> String {
    (x as usize + 1).to_string()
}

/// Parses a vertex: ASCII digits for `d ≤ 9`, comma-separated integers otherwise.
pub fn parse_vertex(text: &str, d: usize) -> Result<Vec<u8>, AutomatonError> {
    let text = text.trim();
    if text.is_empty() || text == "ε" {
        return Ok(Vec::new());
    }
    let parts: Vec<&str> = if d <= 9 && !text.contains(',') {
        text.split("").filter(|s| !s.is_empty()).collect()
    } else {
        text.split(',').map(str::trim).collect()
    };
    parts
        .into_iter()
        .map(|p| {
            let v: usize = p.parse().map_err(|_| AutomatonError::Syntax {
                line: 0,
                message: format!("bad letter `{p}`"),
            })?;
            if v == 0 || v > d {
                return Err(AutomatonError::LetterOutOfRange { letter: v, size: d });
            }
            Ok((v - 1) as u8)
        })
        .collect()
}

pub fn format_vertex(v: &[u8], d: usize) -> String {
    let sep = if d <= 9 { "" } else { "," };
    v.iter()
        .map(|&x| (x as usize + 1).to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

/// Names accepted by [`builtin`].
pub const BUILTINS: [&str; 5] = ["gamma", "bsv", "grigorchuk", "aleshin", "mandelbrot"];

/// Named machines. `mandelbrot` takes a kneading word over `{0,1}` of length
/// `n-1`; letter `i` selects `a_{i+1} = ⟨a_i, 1⟩` (`0`) or `⟨1, a_i⟩` (`1`), and
/// `a_1 = ⟨a_n, 1⟩σ`. The word `0` gives back `gamma` with states `a1, a2`.
pub fn builtin(name: &str, parameter: Option<&str>) -> Result<Transducer, AutomatonError> {
    let s = |v: &str| v.to_string();
    // (out, target) with target 0 = id, k = k-th listed state
    let rows: Vec<(String, StateRow)> = match name {
        // a = ⟨b,1⟩σ, b = ⟨a,1⟩
        "gamma" => vec![
            (s("a"), vec![(1, 2), (0, 0)]),
            (s("b"), vec![(0, 1), (1, 0)]),
        ],
        // λ = ⟨λ,1⟩σ, μ = ⟨μ⁻¹,1⟩σ, μ⁻¹ = ⟨1,μ⟩σ
        "bsv" => vec![
            (s("l"), vec![(1, 1), (0, 0)]),
            (s("m"), vec![(1, 3), (0, 0)]),
            (s("M"), vec![(1, 0), (0, 2)]),
        ],
        // a = ⟨1,1⟩σ, b = ⟨a,c⟩, c = ⟨a,d⟩, d = ⟨1,b⟩
        "grigorchuk" => vec![
            (s("a"), vec![(1, 0), (0, 0)]),
            (s("b"), vec![(0, 1), (1, 3)]),
            (s("c"), vec![(0, 1), (1, 4)]),
            (s("d"), vec![(0, 0), (1, 2)]),
        ],
        // a = ⟨c,b⟩σ, b = ⟨b,c⟩σ, c = ⟨a,a⟩
        "aleshin" => vec![
            (s("a"), vec![(1, 3), (0, 2)]),
            (s("b"), vec![(1, 2), (0, 3)]),
            (s("c"), vec![(0, 1), (1, 1)]),
        ],
        "mandelbrot" => {
            let word = parameter.unwrap_or("");
            if !word.chars().all(|c| c == '0' || c == '1') {
                return Err(AutomatonError::MalformedParameter(word.to_string()));
            }
            let n = word.len() + 1;
            let mut rows = vec![(s("a1"), vec![(1, n), (0, 0)])];
            for (i, c) in word.chars().enumerate() {
                // state a_{i+2} has section a_{i+1} at position given by c
                let prev = i + 1;
                let row = if c == '0' {
                    vec![(0, prev), (1, 0)]
                } else {
                    vec![(0, 0), (1, prev)]
                };
                rows.push((format!("a{}", i + 2), row));
            }
            rows
        }
        other => return Err(AutomatonError::UnknownBuiltin(other.to_string())),
    };
    if name != "mandelbrot" && parameter.is_some() {
        return Err(AutomatonError::MalformedParameter(
            parameter.unwrap_or_default().to_string(),
        ));
    }
    Transducer::from_rows(2, rows)
}

/// The transducer with only the identity state.
pub fn trivial(alphabet: usize) -> Transducer {
    Transducer::from_rows(alphabet, Vec::new()).expect("identity machine is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    const GAMMA_FILE: &str = "\
# basilica
alphabet 2
state a
on 1 -> 2 goto b
on 2 -> 1 goto id
state b
on 1 -> 1 goto a
on 2 -> 2 goto id
";

    fn v(s: &str) -> Vec<u8> {
        parse_vertex(s, 2).unwrap()
    }

    #[test]
    fn parses_gamma_file() {
        let t = parse_transducer(GAMMA_FILE).unwrap();
        assert_eq!(t, builtin("gamma", None).unwrap());
        assert_eq!(t.state_count(), 3);
        assert_eq!(parse_transducer(&t.to_file_string()).unwrap(), t);
    }

    #[test]
    fn trivial_file() {
        let t = parse_transducer("alphabet 2\n").unwrap();
        assert_eq!(t.state_count(), 1);
        assert_eq!(
            t.validate(),
            ValidationReport {
                invertible: true,
                monomial: true,
                dual_invertible: true
            }
        );
    }

    #[test]
    fn rejects_non_permutation() {
        let err = parse_transducer("alphabet 2\nstate a\non 1 -> 1 goto id\non 2 -> 1 goto id\n")
            .unwrap_err();
        assert_eq!(err, AutomatonError::NotPermutation { state: "a".into() });
        assert_eq!(err.to_string(), "state `a`: output not a permutation");
    }

    #[test]
    fn reports_undefined_state_and_syntax_lines() {
        let err = parse_transducer("alphabet 2\nstate a\non 1 -> 2 goto z\non 2 -> 1 goto id\n")
            .unwrap_err();
        assert_eq!(
            err,
            AutomatonError::UndefinedState {
                line: 3,
                name: "z".into()
            }
        );
        let err = parse_transducer("alphabet 2\nstate a\non 1 => 2 goto id\n").unwrap_err();
        assert!(matches!(err, AutomatonError::Syntax { line: 3, .. }));
        let err = parse_transducer("alphabet 2\nstate id\n").unwrap_err();
        assert!(matches!(err, AutomatonError::Syntax { line: 2, .. }));
        let err = parse_transducer("alphabet 2\nstate a\non 1 -> 2 goto id\n").unwrap_err();
        assert!(matches!(err, AutomatonError::Syntax { line: 2, .. }));
    }

    #[test]
    fn builtins_have_expected_sizes() {
        assert_eq!(builtin("gamma", None).unwrap().state_count(), 3);
        assert_eq!(builtin("grigorchuk", None).unwrap().state_count(), 5);
        let bsv = builtin("bsv", None).unwrap();
        assert_eq!(bsv.state_count(), 4);
        assert_eq!(bsv.primary_generators(), vec![1, 2]);
        assert_eq!(
            bsv.canonical(SignedState::positive(3)),
            SignedState::new(2, true)
        );
        assert_eq!(
            builtin("grigorchuk", None).unwrap().primary_generators(),
            vec![1, 2, 3, 4]
        );
        assert!(builtin("nope", None).is_err());
        assert!(matches!(
            builtin("mandelbrot", Some("01x")),
            Err(AutomatonError::MalformedParameter(_))
        ));
        let m = builtin("mandelbrot", Some("0")).unwrap();
        assert_eq!(
            m.to_file_string().replace("a1", "a").replace("a2", "b"),
            builtin("gamma", None).unwrap().to_file_string()
        );
    }

    #[test]
    fn bsv_mu_inverse_state_inverts_mu() {
        let t = builtin("bsv", None).unwrap();
        let m = SignedState::positive(t.state_by_name("m").unwrap());
        let big_m = SignedState::positive(t.state_by_name("M").unwrap());
        for len in 0..7 {
            for idx in 0..(1usize << len) {
                let w: Vec<u8> = (0..len).map(|i| ((idx >> i) & 1) as u8).collect();
                let img = t.apply_state(m, &w).unwrap();
                assert_eq!(t.apply_state(big_m, &img).unwrap(), w);
                assert_eq!(t.apply_state(m.inverse(), &img).unwrap(), w);
            }
        }
    }

    #[test]
    fn validation_reports() {
        let g = builtin("gamma", None).unwrap().validate();
        assert_eq!(
            g,
            ValidationReport {
                invertible: true,
                monomial: true,
                dual_invertible: false
            }
        );
        let gr = builtin("grigorchuk", None).unwrap().validate();
        assert!(gr.invertible && !gr.monomial);
        assert!(builtin("bsv", None).unwrap().validate().monomial);
        // the Aleshin machine is bireversible
        assert!(builtin("aleshin", None).unwrap().validate().dual_invertible);
    }

    #[test]
    fn gamma_action_examples() {
        let t = builtin("gamma", None).unwrap();
        let a = SignedState::positive(1);
        assert_eq!(t.apply_state(a, &v("1")).unwrap(), v("2"));
        assert_eq!(t.apply_state(a, &v("21")).unwrap(), v("11"));
        assert_eq!(
            t.apply_state(SignedState::positive(IDENTITY), &v("2121"))
                .unwrap(),
            v("2121")
        );
        assert_eq!(t.apply_state(a, &[]).unwrap(), Vec::<u8>::new());
        assert!(t.apply_state(a, &[2]).is_err());
    }

    #[test]
    fn dual_of_dual_is_original() {
        for name in ["gamma", "bsv", "grigorchuk", "aleshin"] {
            let t = builtin(name, None).unwrap();
            assert_eq!(t.dual().dual(), DualAutomaton::from(&t));
        }
    }

    #[test]
    fn vertex_formatting() {
        assert_eq!(format_vertex(&v("2112"), 2), "2112");
        assert_eq!(parse_vertex("10,1", 12).unwrap(), vec![9, 0]);
        assert_eq!(format_vertex(&[9, 0], 12), "10,1");
        assert!(parse_vertex("3", 2).is_err());
    }
}
