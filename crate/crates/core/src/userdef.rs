//! Declarative user structures: the `fraisse-structure v1` file format.
//!
//! Line-oriented key/value records. Example:
//!
//! ```text
//! fraisse-structure v1
//! name parity-graph
//! relation E 2 mod 2 0,1;1,0
//! relation D 2 diff 3
//! forbidden E(0,0)
//! ```
//!
//! Relation rules fix an interpretation on the naturals so the structure
//! is lazily enumerable; `forbidden`/`required` templates are axiom
//! schemata over finite configurations, consumed by the amalgamation
//! searcher. Ultrahomogeneity of user structures is trusted input.

use crate::error::{CoreError, Result};
use crate::util::pair_bit;

#[derive(Debug, Clone)]
pub enum RelRule {
    /// Symmetric irreflexive bit-coding rule (random-graph style).
    Rado,
    /// Deterministic pseudorandom symmetric relation from a seed.
    Seeded(u64),
    /// Tuple of residues modulo m is in the listed set.
    Mod { modulus: u64, tuples: Vec<Vec<u64>> },
    /// |a - b| = n on the integer line enumeration 0, 1, -1, 2, -2, ...
    Diff(u64),
    /// Empty relation.
    Never,
}

#[derive(Debug, Clone)]
pub struct UserRel {
    pub name: String,
    pub arity: usize,
    pub rule: RelRule,
}

#[derive(Debug, Clone)]
pub struct Literal {
    pub rel: usize,
    pub args: Vec<usize>,
    pub negated: bool,
}

/// A conjunction of literals over variables 0..vars.
#[derive(Debug, Clone)]
pub struct Template {
    pub vars: usize,
    pub literals: Vec<Literal>,
}

#[derive(Debug, Clone)]
pub struct UserStructure {
    pub name: String,
    pub relations: Vec<UserRel>,
    pub forbidden: Vec<Template>,
    pub required: Vec<Template>,
}

fn int_value(i: u64) -> i64 {
    if i % 2 == 1 {
        ((i + 1) / 2) as i64
    } else {
        -((i / 2) as i64)
    }
}

impl UserStructure {
    pub fn rel_index(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn eval(&self, rel: usize, args: &[u64]) -> bool {
        let r = &self.relations[rel];
        debug_assert_eq!(args.len(), r.arity);
        match &r.rule {
            RelRule::Rado => {
                args.len() == 2
                    && args[0] != args[1]
                    && crate::rado::base_adjacent(args[0], args[1])
            }
            RelRule::Seeded(seed) => {
                args.len() == 2 && args[0] != args[1] && pair_bit(*seed, args[0], args[1])
            }
            RelRule::Mod { modulus, tuples } => {
                let residues: Vec<u64> = args.iter().map(|a| a % modulus).collect();
                tuples.iter().any(|t| t == &residues)
            }
            RelRule::Diff(n) => {
                args.len() == 2 && (int_value(args[0]) - int_value(args[1])).unsigned_abs() == *n
            }
            RelRule::Never => false,
        }
    }

    /// Do two point tuples satisfy exactly the same relation instances
    /// (positionwise)?
    pub fn tuples_agree(&self, dom: &[u64], ran: &[u64]) -> bool {
        debug_assert_eq!(dom.len(), ran.len());
        let n = dom.len();
        if n == 0 {
            return true;
        }
        for (ri, r) in self.relations.iter().enumerate() {
            let k = r.arity;
            if k == 0 {
                continue;
            }
            let mut idx = vec![0usize; k];
            'tuples: loop {
                let a: Vec<u64> = idx.iter().map(|&i| dom[i]).collect();
                let b: Vec<u64> = idx.iter().map(|&i| ran[i]).collect();
                if self.eval(ri, &a) != self.eval(ri, &b) {
                    return false;
                }
                for pos in 0..k {
                    idx[pos] += 1;
                    if idx[pos] < n {
                        continue 'tuples;
                    }
                    idx[pos] = 0;
                }
                break;
            }
        }
        true
    }
}

/// Parses the `fraisse-structure v1` format.
pub fn parse(text: &str) -> Result<UserStructure> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| CoreError::Parse("empty file".into()))?;
    if header != "fraisse-structure v1" {
        return Err(CoreError::Parse(format!("bad header: {header}")));
    }
    let mut out = UserStructure {
        name: "user".into(),
        relations: Vec::new(),
        forbidden: Vec::new(),
        required: Vec::new(),
    };
    for line in lines {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("name") => {
                out.name = parts.next().ok_or_else(|| CoreError::Parse("name?".into()))?.into();
            }
            Some("relation") => {
                let name = parts.next().ok_or_else(|| CoreError::Parse("relation name".into()))?;
                let arity: usize = parts
                    .next()
                    .and_then(|a| a.parse().ok())
                    .ok_or_else(|| CoreError::Parse("relation arity".into()))?;
                let rule = match parts.next() {
                    Some("rado") => RelRule::Rado,
                    Some("seeded") => {
                        let s: u64 = parts
                            .next()
                            .and_then(|x| x.parse().ok())
                            .ok_or_else(|| CoreError::Parse("seed".into()))?;
                        RelRule::Seeded(s)
                    }
                    Some("mod") => {
                        let m: u64 = parts
                            .next()
                            .and_then(|x| x.parse().ok())
                            .ok_or_else(|| CoreError::Parse("modulus".into()))?;
                        let spec = parts.next().unwrap_or("");
                        let tuples = spec
                            .split(';')
                            .filter(|t| !t.is_empty())
                            .map(|t| {
                                t.split(',')
                                    .map(|x| {
                                        x.parse::<u64>()
                                            .map_err(|_| CoreError::Parse(format!("residue {x}")))
                                    })
                                    .collect::<Result<Vec<u64>>>()
                            })
                            .collect::<Result<Vec<_>>>()?;
                        for t in &tuples {
                            if t.len() != arity {
                                return Err(CoreError::Parse("residue tuple arity".into()));
                            }
                        }
                        RelRule::Mod { modulus: m, tuples }
                    }
                    Some("diff") => {
                        let n: u64 = parts
                            .next()
                            .and_then(|x| x.parse().ok())
                            .ok_or_else(|| CoreError::Parse("diff distance".into()))?;
                        RelRule::Diff(n)
                    }
                    Some("never") | None => RelRule::Never,
                    Some(other) => return Err(CoreError::Parse(format!("unknown rule {other}"))),
                };
                out.relations.push(UserRel { name: name.into(), arity, rule });
            }
            Some(kw @ ("forbidden" | "required")) => {
                let body = line[kw.len()..].trim();
                let tpl = parse_template(body, &out)?;
                if kw == "forbidden" {
                    out.forbidden.push(tpl);
                } else {
                    out.required.push(tpl);
                }
            }
            Some(other) => return Err(CoreError::Parse(format!("unknown keyword {other}"))),
            None => {}
        }
    }
    Ok(out)
}

fn parse_template(body: &str, st: &UserStructure) -> Result<Template> {
    let mut literals = Vec::new();
    let mut vars = 0usize;
    for lit in body.split(';').map(str::trim).filter(|l| !l.is_empty()) {
        let (negated, lit) = match lit.strip_prefix('!') {
            Some(rest) => (true, rest),
            None => (false, lit),
        };
        let open = lit.find('(').ok_or_else(|| CoreError::Parse(format!("literal {lit}")))?;
        let close = lit.rfind(')').ok_or_else(|| CoreError::Parse(format!("literal {lit}")))?;
        let name = &lit[..open];
        let rel = st
            .rel_index(name)
            .ok_or_else(|| CoreError::Parse(format!("unknown relation {name}")))?;
        let args = lit[open + 1..close]
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<usize>()
                    .map_err(|_| CoreError::Parse(format!("template var {x}")))
            })
            .collect::<Result<Vec<usize>>>()?;
        if args.len() != st.relations[rel].arity {
            return Err(CoreError::Parse(format!("arity mismatch in {lit}")));
        }
        vars = vars.max(args.iter().copied().max().map_or(0, |m| m + 1));
        literals.push(Literal { rel, args, negated });
    }
    Ok(Template { vars, literals })
}
