//! The `.ext` description format for filtrations, and its JSON mirror.
//!
//! Line-oriented; `#` starts a comment and whitespace around `=` is ignored.
//!
//! ```text
//! # explicit orders g_{-1} g_0 g_1 ...
//! p = 2
//! orders = 16 16 16 2 2 1
//!
//! # or |G| and the drops (break index -> order after)
//! p = 2
//! group = 16
//! break 1 -> 2
//! break 3 -> 1
//!
//! # or a catalog family, optionally overriding expected values
//! family = artin_schreier
//! param p = 3
//! param m = 2
//! expect a = 4/3
//! ```
//!
//! A document that starts with `{` is read as JSON:
//! `{"kind": "orders", "residue_char": 2, "orders": [16, 16, 16, 2, 2, 1]}`.
//! Integers that do not fit in 64 bits are written as decimal strings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::arith::{self, Rational};
use crate::catalog::{CatalogEntry, CatalogError, Family, Quantity};
use crate::filtration::{FiltrationError, RamificationFiltration, ValidationMode};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExtensionSpecDocument {
    Orders {
        residue_char: u64,
        orders: Vec<BigUint>,
    },
    Breaks {
        residue_char: u64,
        group_order: BigUint,
        breaks: Vec<(i64, BigUint)>,
    },
    Catalog {
        family: String,
        params: BTreeMap<String, BigInt>,
        expected: BTreeMap<String, Rational>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error(transparent)]
    Filtration(#[from] FiltrationError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("parameter `{key}` = {value} is out of range")]
    ParamOutOfRange { key: String, value: BigInt },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExtSpecError {
    #[error("{line}:{column}: syntax error: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{line}:{column}: unknown directive `{name}`")]
    UnknownDirective { line: usize, column: usize, name: String },
    #[error("{line}:{column}: duplicate directive `{name}`")]
    DuplicateDirective { line: usize, column: usize, name: String },
    #[error("{line}:{column}: invalid extension: {source}")]
    Validation { line: usize, column: usize, source: ResolveError },
}

impl ExtSpecError {
    pub fn position(&self) -> (usize, usize) {
        match self {
            ExtSpecError::Syntax { line, column, .. }
            | ExtSpecError::UnknownDirective { line, column, .. }
            | ExtSpecError::DuplicateDirective { line, column, .. }
            | ExtSpecError::Validation { line, column, .. } => (*line, *column),
        }
    }
}

type Pos = (usize, usize);

fn syntax(pos: Pos, message: impl Into<String>) -> ExtSpecError {
    ExtSpecError::Syntax { line: pos.0, column: pos.1, message: message.into() }
}

/// Parses text or JSON and validates it in strict mode.
pub fn parse(text: &str) -> Result<ExtensionSpecDocument, ExtSpecError> {
    parse_with_mode(text, ValidationMode::Strict)
}

pub fn parse_with_mode(text: &str, mode: ValidationMode) -> Result<ExtensionSpecDocument, ExtSpecError> {
    if text.trim_start().starts_with('{') {
        parse_json(text, mode)
    } else {
        parse_text(text, mode)
    }
}

/// Like [`parse`], reporting invalid UTF-8 as a positioned syntax error.
pub fn parse_bytes(bytes: &[u8]) -> Result<ExtensionSpecDocument, ExtSpecError> {
    parse_bytes_with_mode(bytes, ValidationMode::Strict)
}

pub fn parse_bytes_with_mode(bytes: &[u8], mode: ValidationMode) -> Result<ExtensionSpecDocument, ExtSpecError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_with_mode(text, mode),
        Err(err) => {
            let good = &bytes[..err.valid_up_to()];
            let text = std::str::from_utf8(good).expect("prefix is valid");
            let line = text.matches('\n').count() + 1;
            let column = text.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            Err(syntax((line, column), "invalid UTF-8"))
        }
    }
}

struct Cursor<'a> {
    line: usize,
    chars: Vec<(usize, char)>,
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: usize, src: &'a str) -> Self {
        Cursor { line, chars: src.char_indices().collect(), src, pos: 0 }
    }

    fn here(&self) -> Pos {
        (self.line, self.pos + 1)
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|(_, c)| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.chars.len()
    }

    fn byte_at(&self, pos: usize) -> usize {
        self.chars.get(pos).map_or(self.src.len(), |(b, _)| *b)
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &'a str {
        let start = self.pos;
        while self.chars.get(self.pos).is_some_and(|(_, c)| pred(*c)) {
            self.pos += 1;
        }
        &self.src[self.byte_at(start)..self.byte_at(self.pos)]
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let first = self.chars.get(self.pos).map(|(_, c)| *c)?;
        if !(first.is_ascii_alphabetic() || first == '_') {
            return None;
        }
        Some(self.take_while(|c| c.is_ascii_alphanumeric() || c == '_'))
    }

    fn expect(&mut self, token: &str) -> Result<(), ExtSpecError> {
        self.skip_ws();
        let rest = &self.src[self.byte_at(self.pos)..];
        if rest.starts_with(token) {
            self.pos += token.chars().count();
            Ok(())
        } else {
            Err(syntax(self.here(), format!("expected `{token}`")))
        }
    }

    /// A whitespace-delimited token, with the position where it starts.
    fn word(&mut self) -> Option<(Pos, &'a str)> {
        self.skip_ws();
        let pos = self.here();
        let w = self.take_while(|c| !c.is_whitespace());
        (!w.is_empty()).then_some((pos, w))
    }

    fn integer(&mut self, what: &str) -> Result<(Pos, BigInt), ExtSpecError> {
        self.skip_ws();
        let pos = self.here();
        let start = self.pos;
        if self.chars.get(self.pos).is_some_and(|(_, c)| *c == '-' || *c == '+') {
            self.pos += 1;
        }
        let digits = self.take_while(|c| c.is_ascii_digit());
        if digits.is_empty() {
            self.pos = start;
            return Err(syntax(pos, format!("expected {what}")));
        }
        let text = &self.src[self.byte_at(start)..self.byte_at(self.pos)];
        Ok((pos, text.parse().expect("sign and digits")))
    }

    fn unsigned(&mut self, what: &str) -> Result<(Pos, BigUint), ExtSpecError> {
        let (pos, n) = self.integer(what)?;
        n.to_biguint()
            .ok_or_else(|| syntax(pos, format!("{what} must be nonnegative")))
            .map(|n| (pos, n))
    }

    fn finish(&mut self) -> Result<(), ExtSpecError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(syntax(self.here(), "unexpected trailing input"))
        }
    }
}

#[derive(Default)]
struct Collected {
    p: Option<(Pos, u64)>,
    orders: Option<(Pos, Vec<BigUint>)>,
    group: Option<(Pos, BigUint)>,
    breaks: Vec<(Pos, i64, BigUint)>,
    family: Option<(Pos, String)>,
    params: BTreeMap<String, (Pos, BigInt)>,
    expected: BTreeMap<String, (Pos, Rational)>,
}

fn set_once<T>(slot: &mut Option<(Pos, T)>, pos: Pos, name: &str, value: T) -> Result<(), ExtSpecError> {
    if slot.is_some() {
        return Err(ExtSpecError::DuplicateDirective { line: pos.0, column: pos.1, name: name.to_string() });
    }
    *slot = Some((pos, value));
    Ok(())
}

fn parse_text(text: &str, mode: ValidationMode) -> Result<ExtensionSpecDocument, ExtSpecError> {
    let mut c = Collected::default();
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let content = raw.split('#').next().unwrap_or("");
        let mut cur = Cursor::new(line_no, content);
        if cur.at_end() {
            continue;
        }
        let head_pos = cur.here();
        let Some(head) = cur.ident() else {
            return Err(syntax(head_pos, "expected a directive name"));
        };
        match head {
            "p" => {
                cur.expect("=")?;
                let (pos, n) = cur.unsigned("a prime")?;
                let p = n.to_u64().ok_or_else(|| syntax(pos, "prime does not fit in 64 bits"))?;
                cur.finish()?;
                set_once(&mut c.p, head_pos, "p", p)?;
            }
            "orders" => {
                cur.expect("=")?;
                let mut orders = Vec::new();
                while !cur.at_end() {
                    orders.push(cur.unsigned("an order")?.1);
                }
                if orders.is_empty() {
                    return Err(syntax(cur.here(), "expected at least one order"));
                }
                set_once(&mut c.orders, head_pos, "orders", orders)?;
            }
            "group" => {
                cur.expect("=")?;
                let (_, g) = cur.unsigned("a group order")?;
                cur.finish()?;
                set_once(&mut c.group, head_pos, "group", g)?;
            }
            "break" => {
                let (pos, index) = cur.integer("a break index")?;
                let index = index.to_i64().ok_or_else(|| syntax(pos, "break index out of range"))?;
                cur.expect("->")?;
                let (_, order) = cur.unsigned("an order")?;
                cur.finish()?;
                c.breaks.push((head_pos, index, order));
            }
            "family" => {
                cur.expect("=")?;
                let pos = cur.here();
                let name = cur.ident().ok_or_else(|| syntax(pos, "expected a family name"))?;
                cur.finish()?;
                set_once(&mut c.family, head_pos, "family", name.to_string())?;
            }
            "param" => {
                let pos = cur.here();
                let key = cur.ident().ok_or_else(|| syntax(pos, "expected a parameter name"))?;
                cur.expect("=")?;
                let (_, value) = cur.integer("an integer")?;
                cur.finish()?;
                if c.params.insert(key.to_string(), (head_pos, value)).is_some() {
                    return Err(ExtSpecError::DuplicateDirective {
                        line: head_pos.0,
                        column: head_pos.1,
                        name: format!("param {key}"),
                    });
                }
            }
            "expect" => {
                let pos = cur.here();
                let key = cur.ident().ok_or_else(|| syntax(pos, "expected a quantity name"))?;
                cur.expect("=")?;
                let (vpos, word) = cur.word().ok_or_else(|| syntax(cur.here(), "expected a rational"))?;
                let value = arith::parse_rational(word)
                    .ok_or_else(|| syntax(vpos, format!("`{word}` is not a rational number")))?;
                cur.finish()?;
                if c.expected.insert(key.to_string(), (head_pos, value)).is_some() {
                    return Err(ExtSpecError::DuplicateDirective {
                        line: head_pos.0,
                        column: head_pos.1,
                        name: format!("expect {key}"),
                    });
                }
            }
            other => {
                return Err(ExtSpecError::UnknownDirective {
                    line: head_pos.0,
                    column: head_pos.1,
                    name: other.to_string(),
                })
            }
        }
    }
    let (doc, anchor) = assemble(c, (last_line + 1, 1))?;
    validate(&doc, anchor, mode)?;
    Ok(doc)
}

/// Picks the document kind and rejects directives that do not belong to it.
fn assemble(c: Collected, eof: Pos) -> Result<(ExtensionSpecDocument, Anchors), ExtSpecError> {
    if let Some((fpos, family)) = c.family {
        let stray = [c.p.as_ref().map(|x| x.0), c.orders.as_ref().map(|x| x.0), c.group.as_ref().map(|x| x.0)]
            .into_iter()
            .flatten()
            .chain(c.breaks.iter().map(|b| b.0))
            .min();
        if let Some(pos) = stray {
            return Err(syntax(pos, "catalog documents take only `param` and `expect` directives"));
        }
        let doc = ExtensionSpecDocument::Catalog {
            family,
            params: c.params.into_iter().map(|(k, (_, v))| (k, v)).collect(),
            expected: c.expected.into_iter().map(|(k, (_, v))| (k, v)).collect(),
        };
        return Ok((doc, Anchors { prime: fpos, main: fpos }));
    }
    if let Some(pos) = c.params.values().map(|v| v.0).chain(c.expected.values().map(|v| v.0)).min() {
        return Err(syntax(pos, "`param` and `expect` require a `family` directive"));
    }
    let Some((ppos, p)) = c.p else {
        let pos = c.orders.as_ref().map(|x| x.0).or(c.group.as_ref().map(|x| x.0)).unwrap_or(eof);
        return Err(syntax(pos, "missing `p = <prime>` directive"));
    };
    match (c.orders, c.group) {
        (Some((opos, orders)), None) => {
            if let Some(b) = c.breaks.first() {
                return Err(syntax(b.0, "`break` cannot be combined with `orders`"));
            }
            Ok((
                ExtensionSpecDocument::Orders { residue_char: p, orders },
                Anchors { prime: ppos, main: opos },
            ))
        }
        (None, Some((gpos, group_order))) => {
            let breaks = c.breaks.into_iter().map(|(_, i, o)| (i, o)).collect();
            Ok((
                ExtensionSpecDocument::Breaks { residue_char: p, group_order, breaks },
                Anchors { prime: ppos, main: gpos },
            ))
        }
        (Some(_), Some((gpos, _))) => Err(syntax(gpos, "`group` cannot be combined with `orders`")),
        (None, None) => match c.breaks.first() {
            Some(b) => Err(syntax(b.0, "`break` requires a `group` directive")),
            None => Err(syntax(eof, "missing `orders`, `group` or `family` directive")),
        },
    }
}

struct Anchors {
    prime: Pos,
    main: Pos,
}

fn validate(doc: &ExtensionSpecDocument, at: Anchors, mode: ValidationMode) -> Result<(), ExtSpecError> {
    doc.resolve_with_mode(mode).map(|_| ()).map_err(|source| {
        let pos = match source {
            ResolveError::Filtration(FiltrationError::InvalidPrime(_)) => at.prime,
            _ => at.main,
        };
        ExtSpecError::Validation { line: pos.0, column: pos.1, source }
    })
}

fn json_err(message: impl Into<String>) -> ExtSpecError {
    syntax((1, 1), message)
}

fn json_uint(v: &Value, what: &str) -> Result<BigUint, ExtSpecError> {
    match v {
        Value::Number(n) => n.as_u64().map(BigUint::from),
        Value::String(s) if !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit()) => s.parse().ok(),
        _ => None,
    }
    .ok_or_else(|| json_err(format!("{what} must be a nonnegative integer or decimal string")))
}

fn json_int(v: &Value, what: &str) -> Result<BigInt, ExtSpecError> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from).or(n.as_u64().map(BigInt::from)),
        Value::String(s) => {
            let digits = s.strip_prefix('-').unwrap_or(s);
            (!digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()))
                .then(|| s.parse().ok())
                .flatten()
        }
        _ => None,
    }
    .ok_or_else(|| json_err(format!("{what} must be an integer or decimal string")))
}

fn json_field<'v>(obj: &'v Map<String, Value>, key: &str) -> Result<&'v Value, ExtSpecError> {
    obj.get(key).ok_or_else(|| json_err(format!("missing key `{key}`")))
}

fn json_prime(obj: &Map<String, Value>) -> Result<u64, ExtSpecError> {
    json_uint(json_field(obj, "residue_char")?, "residue_char")?
        .to_u64()
        .ok_or_else(|| json_err("residue_char does not fit in 64 bits"))
}

fn json_rational(v: &Value) -> Result<Rational, ExtSpecError> {
    let obj = v.as_object().ok_or_else(|| json_err("expected value must be {\"num\", \"den\"}"))?;
    let num = json_int(json_field(obj, "num")?, "num")?;
    let den = json_int(json_field(obj, "den")?, "den")?;
    if den == BigInt::from(0) {
        return Err(json_err("zero denominator"));
    }
    Ok(Rational::new(num, den))
}

fn parse_json(text: &str, mode: ValidationMode) -> Result<ExtensionSpecDocument, ExtSpecError> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        syntax((e.line().max(1), e.column().max(1)), e.to_string())
    })?;
    let obj = value.as_object().ok_or_else(|| json_err("top level must be an object"))?;
    let kind = json_field(obj, "kind")?.as_str().ok_or_else(|| json_err("`kind` must be a string"))?;
    let doc = match kind {
        "orders" => {
            let orders = json_field(obj, "orders")?
                .as_array()
                .ok_or_else(|| json_err("`orders` must be an array"))?
                .iter()
                .map(|v| json_uint(v, "order"))
                .collect::<Result<Vec<_>, _>>()?;
            if orders.is_empty() {
                return Err(json_err("`orders` must not be empty"));
            }
            ExtensionSpecDocument::Orders { residue_char: json_prime(obj)?, orders }
        }
        "breaks" => {
            let breaks = json_field(obj, "breaks")?
                .as_array()
                .ok_or_else(|| json_err("`breaks` must be an array"))?
                .iter()
                .map(|b| {
                    let b = b.as_object().ok_or_else(|| json_err("break must be an object"))?;
                    let index = json_int(json_field(b, "index")?, "index")?
                        .to_i64()
                        .ok_or_else(|| json_err("break index out of range"))?;
                    Ok((index, json_uint(json_field(b, "order_after")?, "order_after")?))
                })
                .collect::<Result<Vec<_>, ExtSpecError>>()?;
            ExtensionSpecDocument::Breaks {
                residue_char: json_prime(obj)?,
                group_order: json_uint(json_field(obj, "group_order")?, "group_order")?,
                breaks,
            }
        }
        "catalog" => {
            let family = json_field(obj, "family")?
                .as_str()
                .ok_or_else(|| json_err("`family` must be a string"))?
                .to_string();
            let params = match obj.get("params") {
                None => BTreeMap::new(),
                Some(v) => v
                    .as_object()
                    .ok_or_else(|| json_err("`params` must be an object"))?
                    .iter()
                    .map(|(k, v)| Ok((k.clone(), json_int(v, k)?)))
                    .collect::<Result<_, ExtSpecError>>()?,
            };
            let expected = match obj.get("expected") {
                None => BTreeMap::new(),
                Some(v) => v
                    .as_object()
                    .ok_or_else(|| json_err("`expected` must be an object"))?
                    .iter()
                    .map(|(k, v)| Ok((k.clone(), json_rational(v)?)))
                    .collect::<Result<_, ExtSpecError>>()?,
            };
            ExtensionSpecDocument::Catalog { family, params, expected }
        }
        other => return Err(json_err(format!("unknown kind `{other}`"))),
    };
    validate(&doc, Anchors { prime: (1, 1), main: (1, 1) }, mode)?;
    Ok(doc)
}

/// JSON number when it fits in 64 bits, decimal string otherwise.
fn uint_value(n: &BigUint) -> Value {
    n.to_u64().map_or_else(|| Value::String(n.to_string()), Value::from)
}

fn int_value(n: &BigInt) -> Value {
    n.to_i64().map_or_else(|| Value::String(n.to_string()), Value::from)
}

pub fn rational_json(q: &Rational) -> Value {
    json!({ "num": q.numer().to_string(), "den": q.denom().to_string() })
}

impl ExtensionSpecDocument {
    pub fn kind(&self) -> &'static str {
        match self {
            ExtensionSpecDocument::Orders { .. } => "orders",
            ExtensionSpecDocument::Breaks { .. } => "breaks",
            ExtensionSpecDocument::Catalog { .. } => "catalog",
        }
    }

    pub fn emit(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Text => self.to_text(),
            OutputFormat::Json => serde_json::to_string_pretty(&self.to_json()).expect("serializable"),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self {
            ExtensionSpecDocument::Orders { residue_char, orders } => {
                let orders: Vec<String> = orders.iter().map(ToString::to_string).collect();
                let _ = writeln!(out, "p = {residue_char}");
                let _ = writeln!(out, "orders = {}", orders.join(" "));
            }
            ExtensionSpecDocument::Breaks { residue_char, group_order, breaks } => {
                let _ = writeln!(out, "p = {residue_char}");
                let _ = writeln!(out, "group = {group_order}");
                for (index, order) in breaks {
                    let _ = writeln!(out, "break {index} -> {order}");
                }
            }
            ExtensionSpecDocument::Catalog { family, params, expected } => {
                let _ = writeln!(out, "family = {family}");
                for (k, v) in params {
                    let _ = writeln!(out, "param {k} = {v}");
                }
                for (k, v) in expected {
                    let _ = writeln!(out, "expect {k} = {v}");
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        match self {
            ExtensionSpecDocument::Orders { residue_char, orders } => json!({
                "kind": "orders",
                "residue_char": residue_char,
                "orders": orders.iter().map(uint_value).collect::<Vec<_>>(),
            }),
            ExtensionSpecDocument::Breaks { residue_char, group_order, breaks } => json!({
                "kind": "breaks",
                "residue_char": residue_char,
                "group_order": uint_value(group_order),
                "breaks": breaks
                    .iter()
                    .map(|(i, o)| json!({ "index": i, "order_after": uint_value(o) }))
                    .collect::<Vec<_>>(),
            }),
            ExtensionSpecDocument::Catalog { family, params, expected } => {
                let mut obj = json!({
                    "kind": "catalog",
                    "family": family,
                    "params": params.iter().map(|(k, v)| (k.clone(), int_value(v))).collect::<Map<_, _>>(),
                });
                if !expected.is_empty() {
                    obj["expected"] = expected
                        .iter()
                        .map(|(k, v)| (k.clone(), rational_json(v)))
                        .collect::<Map<_, _>>()
                        .into();
                }
                obj
            }
        }
    }

    pub fn resolve(&self) -> Result<RamificationFiltration, ResolveError> {
        self.resolve_with_mode(ValidationMode::Strict)
    }

    pub fn resolve_with_mode(&self, mode: ValidationMode) -> Result<RamificationFiltration, ResolveError> {
        match self {
            ExtensionSpecDocument::Orders { residue_char, orders } => {
                Ok(RamificationFiltration::with_mode(*residue_char, orders.clone(), mode)?)
            }
            ExtensionSpecDocument::Breaks { residue_char, group_order, breaks } => Ok(
                RamificationFiltration::from_breaks(*residue_char, group_order.clone(), breaks.clone(), mode)?,
            ),
            ExtensionSpecDocument::Catalog { .. } => {
                Ok(self.catalog_entry().expect("catalog kind")?.filtration)
            }
        }
    }

    /// The catalog entry with `expect` overrides applied; `None` for other kinds.
    pub fn catalog_entry(&self) -> Option<Result<CatalogEntry, ResolveError>> {
        let ExtensionSpecDocument::Catalog { family, params, expected } = self else {
            return None;
        };
        Some((|| {
            let family = Family::from_name(family)?;
            let params = params
                .iter()
                .map(|(k, v)| {
                    v.to_u64()
                        .map(|n| (k.clone(), n))
                        .ok_or_else(|| ResolveError::ParamOutOfRange { key: k.clone(), value: v.clone() })
                })
                .collect::<Result<BTreeMap<_, _>, _>>()?;
            let mut entry = family.build(&params)?;
            for (k, v) in expected {
                entry.override_expected(Quantity::from_key(k)?, v.clone());
            }
            Ok(entry)
        })())
    }
}
