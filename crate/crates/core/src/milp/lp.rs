//! CPLEX-style LP text: writer, a reader for files this crate produces (and
//! hand-written files using the same subset), and the JSON sidecars.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::io::Write;

use num_traits::{Signed, Zero};

use super::model::{IndexTuple, Model, Sense, VarId, VarKind, VariableIndex};
use super::Rational;
use crate::error::{Error, Result};

const WRAP: usize = 78;

fn number(r: &Rational) -> String {
    if r.is_integer() {
        r.to_integer().to_string()
    } else {
        (*r.numer() as f64 / *r.denom() as f64).to_string()
    }
}

/// Appends `chunk` to `out`, starting a continuation line when the current
/// one would grow past the wrap width.
fn push_chunk(out: &mut String, line_start: &mut usize, chunk: &str) {
    if out.len() - *line_start + chunk.len() + 1 > WRAP && out.len() - *line_start > 4 {
        out.push('\n');
        *line_start = out.len();
        out.push_str("   ");
    }
    out.push(' ');
    out.push_str(chunk);
}

fn write_expr(out: &mut String, line_start: &mut usize, model: &Model, terms: &[(VarId, Rational)]) {
    for (i, (id, coef)) in terms.iter().enumerate() {
        let name = model.var(*id).index.to_string();
        let magnitude = coef.abs();
        let body = if magnitude == Rational::from_integer(1) {
            name
        } else {
            format!("{} {name}", number(&magnitude))
        };
        let chunk = match (i, coef.is_negative()) {
            (0, false) => body,
            (0, true) => format!("- {body}"),
            (_, false) => format!("+ {body}"),
            (_, true) => format!("- {body}"),
        };
        push_chunk(out, line_start, &chunk);
    }
}

/// LP text of `model`. Output depends only on the model, so equal models
/// give identical bytes.
pub fn export_lp(model: &Model) -> String {
    let mut out = String::from("\\ avpool deterministic equivalent\nMinimize\n");
    let mut line_start = out.len();
    out.push_str(" obj:");
    write_expr(&mut out, &mut line_start, model, &model.objective);
    out.push_str("\nSubject To\n");
    for row in &model.constraints {
        line_start = out.len();
        let _ = write!(out, " {}:", row.name);
        if row.terms.is_empty() {
            // LP readers need a variable on the left; the row is constant.
            if let Some(first) = model.variables.first() {
                push_chunk(&mut out, &mut line_start, &format!("0 {}", first.index));
            }
        }
        write_expr(&mut out, &mut line_start, model, &row.terms);
        push_chunk(&mut out, &mut line_start, &format!("{} {}", row.sense.symbol(), number(&row.rhs)));
        out.push('\n');
    }

    out.push_str("Bounds\n");
    for var in model.variables.iter().filter(|v| v.kind != VarKind::Binary) {
        let name = var.index.to_string();
        let _ = match var.upper {
            Some(u) if u == var.lower => writeln!(out, " {name} = {}", number(&u)),
            Some(u) => writeln!(out, " {} <= {name} <= {}", number(&var.lower), number(&u)),
            None => writeln!(out, " {name} >= {}", number(&var.lower)),
        };
    }
    for (title, kind) in [("Generals", VarKind::Integer), ("Binaries", VarKind::Binary)] {
        let _ = writeln!(out, "{title}");
        line_start = out.len();
        let mut any = false;
        for var in model.variables.iter().filter(|v| v.kind == kind) {
            push_chunk(&mut out, &mut line_start, &var.index.to_string());
            any = true;
        }
        if any {
            out.push('\n');
        }
    }
    out.push_str("End\n");
    out
}

pub fn write_lp<W: Write>(model: &Model, mut writer: W) -> Result<()> {
    writer.write_all(export_lp(model).as_bytes())?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Num(Rational),
    Plus,
    Minus,
    Colon,
    Op(Sense),
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::LpParse { line, message: message.into() }
}

/// Exact value of a decimal literal such as `12`, `0.25` or `1.5e3`.
fn parse_decimal(text: &str, line: usize) -> Result<Rational> {
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = text[i + 1..].parse().map_err(|_| parse_error(line, format!("bad number {text:?}")))?;
            (&text[..i], e)
        }
        None => (text, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int}{frac}");
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(parse_error(line, format!("bad number {text:?}")));
    }
    let value: i128 = digits.parse().map_err(|_| parse_error(line, format!("number {text:?} out of range")))?;
    let scale = exp - frac.len() as i32;
    let ten = Rational::from_integer(10);
    let pow = num_traits::pow(ten, scale.unsigned_abs() as usize);
    let value = Rational::from_integer(value);
    Ok(if scale >= 0 { value * pow } else { value / pow })
}

fn tokenize(text: &str, line: usize, out: &mut Vec<(Token, usize)>) -> Result<()> {
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            c if c.is_whitespace() => i += 1,
            '+' => {
                out.push((Token::Plus, line));
                i += 1;
            }
            '-' => {
                out.push((Token::Minus, line));
                i += 1;
            }
            ':' => {
                out.push((Token::Colon, line));
                i += 1;
            }
            '<' | '>' | '=' => {
                let mut j = i + 1;
                if j < bytes.len() && matches!(bytes[j], b'<' | b'>' | b'=') {
                    j += 1;
                }
                let sense = match &text[i..j] {
                    "<" | "<=" | "=<" => Sense::Le,
                    ">" | ">=" | "=>" => Sense::Ge,
                    "=" => Sense::Eq,
                    other => return Err(parse_error(line, format!("bad operator {other:?}"))),
                };
                out.push((Token::Op(sense), line));
                i = j;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let mut j = i;
                while j < bytes.len() {
                    let b = bytes[j];
                    let exp_sign = matches!(b, b'+' | b'-') && j > i && matches!(bytes[j - 1], b'e' | b'E');
                    if b.is_ascii_digit() || matches!(b, b'.' | b'e' | b'E') || exp_sign {
                        j += 1;
                    } else {
                        break;
                    }
                }
                out.push((Token::Num(parse_decimal(&text[i..j], line)?), line));
                i = j;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || matches!(bytes[j], b'_' | b'.')) {
                    j += 1;
                }
                out.push((Token::Ident(text[i..j].to_string()), line));
                i = j;
            }
            other => return Err(parse_error(line, format!("unexpected character {other:?}"))),
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Objective,
    Rows,
    Bounds,
    Generals,
    Binaries,
    End,
}

fn section_of(line: &str) -> Option<Section> {
    let lower = line.trim().to_ascii_lowercase();
    Some(match lower.as_str() {
        "minimize" | "minimum" | "min" => Section::Objective,
        "subject to" | "such that" | "st" | "s.t." => Section::Rows,
        "bounds" | "bound" => Section::Bounds,
        "generals" | "general" | "gen" | "integers" => Section::Generals,
        "binaries" | "binary" | "bin" => Section::Binaries,
        "end" => Section::End,
        _ => return None,
    })
}

/// Names in first-appearance order, each resolved to its index.
#[derive(Default)]
struct Names {
    order: Vec<VariableIndex>,
    seen: HashMap<VariableIndex, usize>,
}

impl Names {
    fn get(&mut self, name: &str, line: usize) -> Result<usize> {
        let index: VariableIndex = name.parse().map_err(|e: String| parse_error(line, e))?;
        Ok(*self.seen.entry(index).or_insert_with(|| {
            self.order.push(index);
            self.order.len() - 1
        }))
    }
}

type Expr = Vec<(usize, Rational)>;

/// Reads `[name :] term*` from the token stream, stopping at a sense
/// operator or the end.
fn parse_expr(tokens: &[(Token, usize)], pos: &mut usize, names: &mut Names) -> Result<(Option<String>, Expr)> {
    let mut label = None;
    if let (Some((Token::Ident(name), _)), Some((Token::Colon, _))) = (tokens.get(*pos), tokens.get(*pos + 1)) {
        label = Some(name.clone());
        *pos += 2;
    }
    let mut terms = Vec::new();
    let mut sign = Rational::from_integer(1);
    let mut coef: Option<Rational> = None;
    while let Some((token, line)) = tokens.get(*pos) {
        match token {
            Token::Op(_) => break,
            Token::Plus => {}
            Token::Minus => sign = -sign,
            Token::Num(n) => coef = Some(coef.unwrap_or(Rational::from_integer(1)) * n),
            Token::Ident(name) => {
                // A following colon starts the next labelled row.
                if matches!(tokens.get(*pos + 1), Some((Token::Colon, _))) {
                    break;
                }
                let id = names.get(name, *line)?;
                terms.push((id, sign * coef.unwrap_or(Rational::from_integer(1))));
                sign = Rational::from_integer(1);
                coef = None;
            }
            Token::Colon => return Err(parse_error(*line, "unexpected ':'")),
        }
        *pos += 1;
    }
    if coef.is_some_and(|c| !c.is_zero()) {
        let line = tokens.get(pos.saturating_sub(1)).map_or(0, |t| t.1);
        return Err(parse_error(line, "constant terms are not supported"));
    }
    Ok((label, terms))
}

fn signed_number(tokens: &[(Token, usize)], pos: &mut usize, line: usize) -> Result<Rational> {
    let mut sign = Rational::from_integer(1);
    loop {
        match tokens.get(*pos) {
            Some((Token::Plus, _)) => *pos += 1,
            Some((Token::Minus, _)) => {
                sign = -sign;
                *pos += 1;
            }
            Some((Token::Num(n), _)) => {
                *pos += 1;
                return Ok(sign * n);
            }
            _ => return Err(parse_error(line, "expected a number")),
        }
    }
}

enum Bound {
    Value(Rational),
    Infinite,
}

fn bound_value(tokens: &[(Token, usize)], pos: &mut usize, line: usize) -> Result<Bound> {
    let mut negative = false;
    while let Some((Token::Plus | Token::Minus, _)) = tokens.get(*pos) {
        negative ^= tokens[*pos].0 == Token::Minus;
        *pos += 1;
    }
    match tokens.get(*pos) {
        Some((Token::Ident(s), _)) if matches!(s.to_ascii_lowercase().as_str(), "inf" | "infinity") => {
            *pos += 1;
            Ok(Bound::Infinite)
        }
        Some((Token::Num(n), _)) => {
            *pos += 1;
            Ok(Bound::Value(if negative { -n } else { *n }))
        }
        _ => Err(parse_error(line, "expected a bound")),
    }
}

/// Reads an LP file. Every variable name must follow the family/index
/// naming scheme so the result is a [`Model`] over [`VariableIndex`]es.
pub fn parse_lp(text: &str) -> Result<Model> {
    let mut section = Section::Preamble;
    let mut objective_tokens = Vec::new();
    let mut row_tokens = Vec::new();
    let mut bound_lines = Vec::new();
    let mut integer_names = Vec::new();
    let mut binary_names = Vec::new();

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('\\').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        if let Some(next) = section_of(line) {
            section = next;
            continue;
        }
        match section {
            Section::Preamble => return Err(parse_error(line_no, "content before the objective section")),
            Section::Objective => tokenize(line, line_no, &mut objective_tokens)?,
            Section::Rows => tokenize(line, line_no, &mut row_tokens)?,
            Section::Bounds => {
                let mut tokens = Vec::new();
                tokenize(line, line_no, &mut tokens)?;
                bound_lines.push((line_no, tokens));
            }
            Section::Generals | Section::Binaries => {
                for name in line.split_whitespace() {
                    let target = if section == Section::Generals { &mut integer_names } else { &mut binary_names };
                    target.push((name.to_string(), line_no));
                }
            }
            Section::End => return Err(parse_error(line_no, "content after End")),
        }
    }
    if section != Section::End {
        return Err(parse_error(text.lines().count(), "missing End"));
    }

    let mut names = Names::default();
    let mut pos = 0;
    let (_, objective) = parse_expr(&objective_tokens, &mut pos, &mut names)?;
    if pos != objective_tokens.len() {
        return Err(parse_error(objective_tokens[pos].1, "unexpected token in objective"));
    }

    let mut rows = Vec::new();
    let mut pos = 0;
    while pos < row_tokens.len() {
        let line = row_tokens[pos].1;
        let (label, terms) = parse_expr(&row_tokens, &mut pos, &mut names)?;
        let sense = match row_tokens.get(pos) {
            Some((Token::Op(s), _)) => *s,
            _ => return Err(parse_error(line, "row without a sense")),
        };
        pos += 1;
        let rhs = signed_number(&row_tokens, &mut pos, line)?;
        let name = label.unwrap_or_else(|| format!("R{}", rows.len() + 1));
        rows.push((name, terms, sense, rhs));
    }

    let mut lower: HashMap<usize, Rational> = HashMap::new();
    let mut upper: HashMap<usize, Option<Rational>> = HashMap::new();
    for (line, tokens) in &bound_lines {
        let line = *line;
        let ident_at = |p: usize| match tokens.get(p) {
            Some((Token::Ident(s), _)) => Some(s.clone()),
            _ => None,
        };
        if matches!(ident_at(1), Some(w) if w.eq_ignore_ascii_case("free")) {
            return Err(parse_error(line, "free variables are not supported"));
        }
        let mut pos = 0;
        let apply = |id: usize, sense: Sense, b: Bound, lower: &mut HashMap<usize, Rational>, upper: &mut HashMap<usize, Option<Rational>>| -> Result<()> {
            match (sense, b) {
                (Sense::Le, Bound::Value(v)) => {
                    upper.insert(id, Some(v));
                }
                (Sense::Le, Bound::Infinite) => {
                    upper.insert(id, None);
                }
                (Sense::Ge, Bound::Value(v)) => {
                    lower.insert(id, v);
                }
                (Sense::Eq, Bound::Value(v)) => {
                    lower.insert(id, v);
                    upper.insert(id, Some(v));
                }
                _ => return Err(parse_error(line, "unsupported infinite bound")),
            }
            Ok(())
        };
        let flip = |s: Sense| match s {
            Sense::Le => Sense::Ge,
            Sense::Ge => Sense::Le,
            Sense::Eq => Sense::Eq,
        };
        if let Some(name) = ident_at(0).filter(|s| !s.eq_ignore_ascii_case("inf") && !s.eq_ignore_ascii_case("infinity")) {
            // name op value
            let id = names.get(&name, line)?;
            let Some((Token::Op(sense), _)) = tokens.get(1) else {
                return Err(parse_error(line, "expected a bound operator"));
            };
            pos = 2;
            let b = bound_value(tokens, &mut pos, line)?;
            apply(id, *sense, b, &mut lower, &mut upper)?;
        } else {
            // value op name [op value]
            let b = bound_value(tokens, &mut pos, line)?;
            let Some((Token::Op(sense), _)) = tokens.get(pos) else {
                return Err(parse_error(line, "expected a bound operator"));
            };
            let name = ident_at(pos + 1).ok_or_else(|| parse_error(line, "expected a variable"))?;
            let id = names.get(&name, line)?;
            match b {
                Bound::Infinite if *sense == Sense::Le => {}
                b => apply(id, flip(*sense), b, &mut lower, &mut upper)?,
            }
            pos += 2;
            if let Some((Token::Op(sense2), _)) = tokens.get(pos) {
                pos += 1;
                let b = bound_value(tokens, &mut pos, line)?;
                apply(id, *sense2, b, &mut lower, &mut upper)?;
            }
        }
        if pos != tokens.len() {
            return Err(parse_error(line, "trailing tokens in bound"));
        }
    }

    let mut kinds: HashMap<usize, VarKind> = HashMap::new();
    for (name, line) in &integer_names {
        kinds.insert(names.get(name, *line)?, VarKind::Integer);
    }
    for (name, line) in &binary_names {
        kinds.insert(names.get(name, *line)?, VarKind::Binary);
    }

    let mut model = Model::default();
    for (i, index) in names.order.iter().enumerate() {
        let kind = kinds.get(&i).copied().unwrap_or(VarKind::Continuous);
        let (lo, hi) = match kind {
            VarKind::Binary => (Rational::from_integer(0), Some(Rational::from_integer(1))),
            _ => (Rational::from_integer(0), None),
        };
        let lo = lower.get(&i).copied().unwrap_or(lo);
        let hi = upper.get(&i).copied().unwrap_or(hi);
        model.add_variable(*index, kind, lo, hi);
    }
    let to_ids = |expr: Expr| expr.into_iter().map(|(i, c)| (VarId(i), c)).collect();
    model.set_objective(to_ids(objective));
    for (name, terms, sense, rhs) in rows {
        model.add_constraint(name, to_ids(terms), sense, rhs);
    }
    Ok(model)
}

/// JSON object mapping every variable name to its family and index tuple.
pub fn variable_map(model: &Model) -> String {
    let map: BTreeMap<String, IndexTuple> = model
        .variables
        .iter()
        .map(|v| (v.index.to_string(), IndexTuple::from(v.index)))
        .collect();
    serde_json::to_string_pretty(&map).expect("map of strings serializes")
}

/// Reads a variable map, checking every name agrees with its tuple.
pub fn read_variable_map(text: &str) -> Result<BTreeMap<String, VariableIndex>> {
    let raw: BTreeMap<String, IndexTuple> = serde_json::from_str(text)?;
    raw.into_iter()
        .map(|(name, tuple)| {
            let index = VariableIndex::try_from(&tuple).map_err(Error::MalformedLog)?;
            if index.to_string() != name {
                return Err(Error::MalformedLog(format!("variable map entry {name:?} names {index}")));
            }
            Ok((name, index))
        })
        .collect()
}

/// Assignment JSON: names to integers, or to `"p/q"` strings for
/// fractional values. Zero entries are omitted.
pub fn write_assignment(assignment: &HashMap<VariableIndex, Rational>) -> String {
    let map: BTreeMap<String, serde_json::Value> = assignment
        .iter()
        .filter(|(_, v)| !v.is_zero())
        .map(|(k, v)| {
            let value = if v.is_integer() {
                serde_json::Value::from(*v.numer() as i64)
            } else {
                serde_json::Value::from(v.to_string())
            };
            (k.to_string(), value)
        })
        .collect();
    serde_json::to_string_pretty(&map).expect("map of values serializes")
}

pub fn read_assignment(text: &str) -> Result<HashMap<VariableIndex, Rational>> {
    let raw: BTreeMap<String, serde_json::Value> = serde_json::from_str(text)?;
    let bad = |name: &str| Error::MalformedLog(format!("bad assignment value for {name}"));
    raw.into_iter()
        .map(|(name, value)| {
            let index: VariableIndex = name.parse().map_err(Error::MalformedLog)?;
            let v = match &value {
                serde_json::Value::Number(n) => match n.as_i64() {
                    Some(i) => Rational::from_integer(i.into()),
                    None => parse_decimal(&n.to_string(), 0).map_err(|_| bad(&name))?,
                },
                serde_json::Value::String(s) => {
                    let (neg, body) = s.strip_prefix('-').map_or((false, s.as_str()), |b| (true, b));
                    let v = match body.split_once('/') {
                        Some((p, q)) => {
                            let p: i128 = p.trim().parse().map_err(|_| bad(&name))?;
                            let q: i128 = q.trim().parse().map_err(|_| bad(&name))?;
                            if q == 0 {
                                return Err(bad(&name));
                            }
                            Rational::new(p, q)
                        }
                        None => parse_decimal(body.trim(), 0).map_err(|_| bad(&name))?,
                    };
                    if neg { -v } else { v }
                }
                _ => return Err(bad(&name)),
            };
            Ok((index, v))
        })
        .collect()
}
