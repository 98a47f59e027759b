//! The line-oriented instance format.
//!
//! An instance is a `;`-separated list of clauses, `group` first:
//!
//! ```text
//! group 3 3 3; set random 0.2 seed=7; eq 1 1 1; delta 1/2
//! group 7; set {0,1,3}; bset {(0)}
//! group 3 3 3 3; set solution_free (1,1,1) seed=3 method=lex
//! ```
//!
//! Set clauses (`set`, `bset`) take a literal `{...}` or a generator:
//! `random <density> [seed=N]`, `subgroup {gens}`,
//! `subgroup_plus_noise {gens} k=N [seed=N]`,
//! `solution_free (c1,...,cr) [seed=N] [method=random|lex]`.
//! Parameter clauses: `eq c1 .. cr`, `delta`, `eta`, `eps`, `c` (rationals or
//! decimals), `gamma (..)`, `w {..}`, `boost M`, `max_iters N`, `min_order N`.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spandoubler_core::additive::{EquationSpec, PointSet, DEFAULT_BRUTE_BUDGET};
use spandoubler_core::generate::{random_set, solution_free, subgroup_plus_noise, FreeMethod};
use spandoubler_core::group::Group;
use spandoubler_core::Threshold;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at byte {}: {}", self.offset, self.message)
    }
}

impl std::error::Error for ParseError {}

fn err<T>(offset: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        offset,
        message: message.into(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum SetSpec {
    Literal(Vec<Vec<u64>>),
    Random { density: f64, seed: Option<u64> },
    Subgroup(Vec<Vec<u64>>),
    SubgroupPlusNoise { gens: Vec<Vec<u64>>, k: usize, seed: Option<u64> },
    SolutionFree { coefficients: Vec<i64>, seed: Option<u64>, method: FreeMethod },
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct InstanceSpec {
    pub text: String,
    pub factors: Vec<u64>,
    pub set: Option<SetSpec>,
    pub bset: Option<SetSpec>,
    pub equation: Option<Vec<i64>>,
    pub delta: Option<Threshold>,
    pub eta: Option<Threshold>,
    pub eps: Option<Threshold>,
    pub c: Option<Threshold>,
    pub gamma: Option<Vec<u64>>,
    pub w: Option<Vec<Vec<u64>>>,
    pub boost: Option<f64>,
    pub max_iters: Option<usize>,
    pub min_order: Option<usize>,
    pub warnings: Vec<String>,
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    base: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str, base: usize) -> Self {
        Cursor { text, pos: 0, base }
    }

    fn at(&self) -> usize {
        self.base + self.pos
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(char::is_whitespace) {
            self.pos += self.rest().chars().next().map_or(0, char::len_utf8);
        }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn done(&mut self) -> bool {
        self.skip_ws();
        self.rest().is_empty()
    }

    fn word(&mut self) -> Option<(usize, &'a str)> {
        self.skip_ws();
        let start = self.pos;
        let len = self
            .rest()
            .find(|ch: char| ch.is_whitespace())
            .unwrap_or(self.rest().len());
        if len == 0 {
            return None;
        }
        self.pos += len;
        Some((self.base + start, &self.text[start..start + len]))
    }

    fn expect(&mut self, ch: char) -> Result<(), ParseError> {
        self.skip_ws();
        if self.rest().starts_with(ch) {
            self.pos += ch.len_utf8();
            Ok(())
        } else {
            err(self.at(), format!("expected '{ch}'"))
        }
    }

    fn eat(&mut self, ch: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(ch) {
            self.pos += ch.len_utf8();
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> Result<i64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        let len = self
            .rest()
            .char_indices()
            .take_while(|&(i, ch)| ch.is_ascii_digit() || (i == 0 && ch == '-'))
            .count();
        let tok = &self.text[start..start + len];
        self.pos += len;
        tok.parse()
            .or_else(|_| err(self.base + start, format!("malformed integer '{tok}'")))
    }

    /// `(a,b,...)`, or a bare integer when `bare` is allowed.
    fn tuple(&mut self, bare: bool) -> Result<(usize, Vec<i64>), ParseError> {
        self.skip_ws();
        let start = self.at();
        if !self.rest().starts_with('(') {
            if bare {
                return Ok((start, vec![self.int()?]));
            }
            return err(start, "expected '('");
        }
        self.expect('(')?;
        let mut out = vec![self.int()?];
        while self.eat(',') {
            out.push(self.int()?);
        }
        self.expect(')')?;
        Ok((start, out))
    }

    /// `{t1,t2,...}` of tuples (bare integers allowed for rank-1 groups).
    fn tuple_list(&mut self, bare: bool) -> Result<Vec<(usize, Vec<i64>)>, ParseError> {
        self.expect('{')?;
        let mut out = Vec::new();
        if self.eat('}') {
            return Ok(out);
        }
        loop {
            out.push(self.tuple(bare)?);
            if self.eat('}') {
                return Ok(out);
            }
            self.expect(',')?;
        }
    }

    /// Trailing `key=value` options.
    fn options(&mut self, allowed: &[&str]) -> Result<Vec<(usize, &'a str, &'a str)>, ParseError> {
        let mut out = Vec::new();
        while let Some((at, w)) = self.word() {
            match w.split_once('=') {
                Some((k, v)) if allowed.contains(&k) => out.push((at, k, v)),
                Some((k, _)) => return err(at, format!("unknown option '{k}'")),
                None => return err(at, format!("unexpected token '{w}'")),
            }
        }
        Ok(out)
    }
}

fn element(factors: &[u64], at: usize, coords: Vec<i64>) -> Result<Vec<u64>, ParseError> {
    if coords.len() != factors.len() {
        return err(
            at,
            format!(
                "element has {} coordinates but the group has {} factors",
                coords.len(),
                factors.len()
            ),
        );
    }
    Ok(coords
        .iter()
        .zip(factors)
        .map(|(&c, &m)| c.rem_euclid(m as i64) as u64)
        .collect())
}

fn elements(factors: &[u64], list: Vec<(usize, Vec<i64>)>) -> Result<Vec<Vec<u64>>, ParseError> {
    list.into_iter().map(|(at, c)| element(factors, at, c)).collect()
}

fn parse_u64(at: usize, v: &str) -> Result<u64, ParseError> {
    v.parse().or_else(|_| err(at, format!("malformed integer '{v}'")))
}

fn parse_set(cur: &mut Cursor<'_>, factors: &[u64]) -> Result<SetSpec, ParseError> {
    let bare = factors.len() == 1;
    cur.skip_ws();
    if cur.rest().starts_with('{') {
        let list = cur.tuple_list(bare)?;
        return Ok(SetSpec::Literal(elements(factors, list)?));
    }
    let Some((at, kind)) = cur.word() else {
        return err(cur.at(), "missing set description");
    };
    let seed_of = |opts: &[(usize, &str, &str)]| -> Result<Option<u64>, ParseError> {
        opts.iter()
            .find(|o| o.1 == "seed")
            .map(|o| parse_u64(o.0, o.2))
            .transpose()
    };
    match kind {
        "random" => {
            let Some((dat, d)) = cur.word() else {
                return err(cur.at(), "missing density");
            };
            let density: f64 = d
                .parse()
                .or_else(|_| err(dat, format!("malformed density '{d}'")))?;
            if !(0.0..=1.0).contains(&density) {
                return err(dat, "density must lie in [0, 1]");
            }
            let opts = cur.options(&["seed"])?;
            Ok(SetSpec::Random {
                density,
                seed: seed_of(&opts)?,
            })
        }
        "subgroup" => {
            let list = cur.tuple_list(bare)?;
            cur.options(&[])?;
            Ok(SetSpec::Subgroup(elements(factors, list)?))
        }
        "subgroup_plus_noise" => {
            let gens = elements(factors, cur.tuple_list(bare)?)?;
            let opts = cur.options(&["k", "seed"])?;
            let Some(&(kat, _, kv)) = opts.iter().find(|o| o.1 == "k") else {
                return err(cur.at(), "missing k=<points>");
            };
            Ok(SetSpec::SubgroupPlusNoise {
                gens,
                k: parse_u64(kat, kv)? as usize,
                seed: seed_of(&opts)?,
            })
        }
        "solution_free" => {
            let (_, coefficients) = cur.tuple(false)?;
            let opts = cur.options(&["seed", "method"])?;
            let method = match opts.iter().find(|o| o.1 == "method") {
                None => FreeMethod::GreedyRandom,
                Some(&(_, _, "random")) => FreeMethod::GreedyRandom,
                Some(&(_, _, "lex")) => FreeMethod::GreedyLex,
                Some(&(mat, _, v)) => return err(mat, format!("unknown method '{v}'")),
            };
            Ok(SetSpec::SolutionFree {
                coefficients,
                seed: seed_of(&opts)?,
                method,
            })
        }
        other => err(at, format!("unknown set generator '{other}'")),
    }
}

fn parse_threshold(cur: &mut Cursor<'_>, name: &str) -> Result<Threshold, ParseError> {
    let Some((at, w)) = cur.word() else {
        return err(cur.at(), format!("missing value for {name}"));
    };
    w.parse()
        .or_else(|_| err(at, format!("malformed value '{w}' for {name}")))
}

fn parse_number<T: std::str::FromStr>(cur: &mut Cursor<'_>, name: &str) -> Result<T, ParseError> {
    let Some((at, w)) = cur.word() else {
        return err(cur.at(), format!("missing value for {name}"));
    };
    w.parse()
        .or_else(|_| err(at, format!("malformed value '{w}' for {name}")))
}

/// Parses one instance; errors carry the byte offset of the offending token.
pub fn parse_instance(text: &str) -> Result<InstanceSpec, ParseError> {
    let mut spec = InstanceSpec {
        text: text.trim().to_string(),
        ..InstanceSpec::default()
    };
    let mut offset = 0;
    let mut seen_group = false;
    for clause in text.split(';') {
        let base = offset;
        offset += clause.len() + 1;
        let mut cur = Cursor::new(clause, base);
        let Some((kat, keyword)) = cur.word() else {
            continue;
        };
        if !seen_group && keyword != "group" {
            return err(kat, "the first clause must be 'group'");
        }
        let factors = spec.factors.clone();
        match keyword {
            "group" => {
                if seen_group {
                    return err(kat, "duplicate 'group' clause");
                }
                seen_group = true;
                while !cur.done() {
                    let at = cur.at();
                    let m = cur.int()?;
                    if m < 2 {
                        return err(at, format!("cyclic factor {m} is smaller than 2"));
                    }
                    spec.factors.push(m as u64);
                }
                if spec.factors.is_empty() {
                    return err(kat, "group needs at least one factor");
                }
                continue;
            }
            "set" => spec.set = Some(parse_set(&mut cur, &factors)?),
            "bset" => spec.bset = Some(parse_set(&mut cur, &factors)?),
            "eq" => {
                let mut cs = Vec::new();
                while !cur.done() {
                    cs.push(cur.int()?);
                }
                if cs.len() < 3 {
                    return err(kat, format!("equation needs at least 3 coefficients, got {}", cs.len()));
                }
                let p = factors[0] as i64;
                if factors.iter().all(|&m| m as i64 == p) {
                    let sum = cs.iter().sum::<i64>().rem_euclid(p);
                    if sum != 0 {
                        spec.warnings.push(format!(
                            "coefficients sum to {} mod {p}: equation is unbalanced",
                            sum
                        ));
                    }
                }
                spec.equation = Some(cs);
            }
            "delta" => spec.delta = Some(parse_threshold(&mut cur, "delta")?),
            "eta" => spec.eta = Some(parse_threshold(&mut cur, "eta")?),
            "eps" => spec.eps = Some(parse_threshold(&mut cur, "eps")?),
            "c" => spec.c = Some(parse_threshold(&mut cur, "c")?),
            "gamma" => {
                let (at, t) = cur.tuple(factors.len() == 1)?;
                spec.gamma = Some(element(&factors, at, t)?);
            }
            "w" => spec.w = Some(elements(&factors, cur.tuple_list(factors.len() == 1)?)?),
            "boost" => spec.boost = Some(parse_number(&mut cur, "boost")?),
            "max_iters" => spec.max_iters = Some(parse_number(&mut cur, "max_iters")?),
            "min_order" => spec.min_order = Some(parse_number(&mut cur, "min_order")?),
            other => return err(kat, format!("unknown field '{other}'")),
        }
        if !cur.done() {
            return err(cur.at(), "trailing input in clause");
        }
    }
    if !seen_group {
        return err(0, "missing 'group' clause");
    }
    Ok(spec)
}

/// A parsed instance with its group and sets built.
#[derive(Clone, Debug)]
pub struct Instance {
    pub spec: InstanceSpec,
    pub group: Group,
    pub set: Option<PointSet>,
    pub bset: Option<PointSet>,
    pub equation: Option<EquationSpec>,
}

fn build_set(group: &Group, s: &SetSpec, default_seed: u64, salt: u64) -> spandoubler_core::Result<PointSet> {
    let rng_for = |seed: Option<u64>| ChaCha8Rng::seed_from_u64(seed.unwrap_or(default_seed) ^ salt);
    let idx = |e: &Vec<u64>| group.element(e).map(|x| group.index_of(&x.coords));
    match s {
        SetSpec::Literal(es) => Ok(PointSet::from_indices(
            group,
            es.iter().map(idx).collect::<spandoubler_core::Result<Vec<_>>>()?,
        )),
        SetSpec::Random { density, seed } => random_set(group, *density, &mut rng_for(*seed)),
        SetSpec::Subgroup(gens) => {
            let g: Vec<usize> = gens.iter().map(idx).collect::<spandoubler_core::Result<_>>()?;
            Ok(PointSet::subgroup(group, &g))
        }
        SetSpec::SubgroupPlusNoise { gens, k, seed } => {
            let g: Vec<usize> = gens.iter().map(idx).collect::<spandoubler_core::Result<_>>()?;
            subgroup_plus_noise(group, &g, *k, &mut rng_for(*seed))
        }
        SetSpec::SolutionFree {
            coefficients,
            seed,
            method,
        } => {
            let c = EquationSpec::for_group(coefficients, group)?;
            solution_free(group, &c, *method, DEFAULT_BRUTE_BUDGET, &mut rng_for(*seed))
        }
    }
}

impl Instance {
    /// Builds the group (under `max_order`) and any sets; seeds default to `default_seed`.
    pub fn materialize(spec: InstanceSpec, max_order: usize, default_seed: u64) -> spandoubler_core::Result<Self> {
        let group = Group::new(&spec.factors, max_order)?;
        let set = spec
            .set
            .as_ref()
            .map(|s| build_set(&group, s, default_seed, 0))
            .transpose()?;
        let bset = spec
            .bset
            .as_ref()
            .map(|s| build_set(&group, s, default_seed, 0x9e37_79b9_7f4a_7c15))
            .transpose()?;
        let equation = spec
            .equation
            .as_ref()
            .map(|cs| EquationSpec::for_group(cs, &group))
            .transpose()?;
        Ok(Instance {
            spec,
            group,
            set,
            bset,
            equation,
        })
    }
}
