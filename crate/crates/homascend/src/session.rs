//! Line-oriented session files: declarations of fields, algebras, maps and
//! modules, configuration, and a command list. Every declared object is
//! verified at parse time (algebra axioms, map multiplicativity, module
//! structure), and parse errors carry line and column.

use std::collections::BTreeMap;

use crate::algebra::{natural_quotient_map, AlgElem, Algebra, AlgebraMap};
use crate::error::{Error, Result};
use crate::field::{Field, FieldElem};
use crate::fmodule::FModule;
use crate::mat::Mat;
use crate::mpoly::MPoly;
use crate::pidmodel::{ExtensionClass, PidVector};
use crate::poly::Poly;

#[derive(Clone, Debug)]
pub struct Config {
    pub seed: u64,
    pub ext_range: usize,
    pub dimension_cap: usize,
    pub precision: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 0,
            ext_range: 5,
            dimension_cap: 12,
            precision: 16,
        }
    }
}

/// A declared module together with its generator embedding (column i is the
/// i-th presentation generator inside the module's coordinates).
#[derive(Clone)]
pub struct ModuleDecl {
    pub module: FModule,
    pub gens: Mat,
}

#[derive(Default)]
pub struct Session {
    pub fields: BTreeMap<String, Field>,
    pub algebras: BTreeMap<String, Algebra>,
    pub maps: BTreeMap<String, AlgebraMap>,
    pub modules: BTreeMap<String, ModuleDecl>,
    pub config: Config,
    pub commands: Vec<Command>,
}

#[derive(Clone, Debug)]
pub enum Command {
    Dagger {
        map: String,
    },
    Flat {
        map: String,
    },
    Ascend {
        map: String,
        module: String,
    },
    Ext {
        m: String,
        n: String,
        degree: usize,
    },
    Krs {
        module: String,
    },
    Iso {
        m: String,
        n: String,
    },
    Extended {
        map: String,
        module: String,
    },
    MatrixEquiv {
        map: String,
        scalar: FieldElem,
        field: Field,
    },
    Separability {
        map: String,
    },
    Summand {
        map: String,
        module: String,
    },
    Vmax {
        map: String,
        module: String,
        gens: Vec<Vec<MPoly>>,
    },
    Gallery {
        id: String,
        params: BTreeMap<String, i64>,
    },
    PidClassify {
        gens: usize,
        rows: Vec<Vec<Poly>>,
    },
    PidAscent {
        free: usize,
        torsion: Vec<usize>,
    },
    PidExt {
        m: (usize, Vec<usize>),
        n: (usize, Vec<usize>),
        degree: usize,
    },
    PidExtend {
        free: usize,
        torsion: Vec<usize>,
    },
    PidProp32 {
        a: usize,
        b: usize,
        class: ExtensionClass,
    },
    PidVmax {
        torsion: Vec<usize>,
        free: usize,
        gens: Vec<PidVector>,
        prec: usize,
    },
}

impl Command {
    pub fn label(&self) -> String {
        match self {
            Command::Dagger { map } => format!("dagger {map}"),
            Command::Flat { map } => format!("flat {map}"),
            Command::Ascend { map, module } => format!("ascend {map} {module}"),
            Command::Ext { m, n, degree } => format!("ext {m} {n} {degree}"),
            Command::Krs { module } => format!("krs {module}"),
            Command::Iso { m, n } => format!("iso {m} {n}"),
            Command::Extended { map, module } => format!("extended {map} {module}"),
            Command::MatrixEquiv { map, scalar, field } => {
                format!("matrix_equiv {map} {}", field.fmt_elem(scalar))
            }
            Command::Separability { map } => format!("separability {map}"),
            Command::Summand { map, module } => format!("summand {map} {module}"),
            Command::Vmax { map, module, gens } => {
                format!("vmax {map} {module} ({} generators)", gens.len())
            }
            Command::Gallery { id, .. } => format!("gallery {id}"),
            Command::PidClassify { gens, rows } => {
                format!("pid_classify gens {gens} rels {}", rows.len())
            }
            Command::PidAscent { free, torsion } => {
                format!("pid_ascent free {free} tors {torsion:?}")
            }
            Command::PidExt { m, n, degree } => {
                format!("pid_ext ({},{:?}) ({},{:?}) {degree}", m.0, m.1, n.0, n.1)
            }
            Command::PidExtend { free, torsion } => {
                format!("pid_extend free {free} tors {torsion:?}")
            }
            Command::PidProp32 { a, b, class } => format!("pid_prop32 {a} {b} {class:?}"),
            Command::PidVmax {
                torsion,
                free,
                gens,
                prec,
            } => {
                format!(
                    "pid_vmax tors {torsion:?} free {free} ({} gens) prec {prec}",
                    gens.len()
                )
            }
        }
    }
}

// ---- tokenizer ----

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(char),
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    col: usize,
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c == '#' {
            break;
        }
        let col = i + 1;
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '.')
            {
                i += 1;
            }
            out.push(Spanned {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                col,
            });
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<i64>().map_err(|_| Error::Parse {
                line: lineno,
                col,
                msg: format!("integer out of range: {text}"),
            })?;
            out.push(Spanned {
                tok: Tok::Int(v),
                col,
            });
        } else if "[](),=+-*/^.".contains(c) {
            out.push(Spanned {
                tok: Tok::Sym(c),
                col,
            });
            i += 1;
        } else {
            return Err(Error::Parse {
                line: lineno,
                col,
                msg: format!("unexpected character {c:?}"),
            });
        }
    }
    Ok(out)
}

struct Cursor {
    toks: Vec<Spanned>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }
    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(0, |s| s.col)
    }
    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t.map(|s| s.tok)
    }
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            line: self.line,
            col: self.col(),
            msg: msg.into(),
        })
    }
    fn expect_ident(&mut self) -> Result<String> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            other => Err(Error::Parse {
                line: self.line,
                col: self.col(),
                msg: format!("expected identifier, got {other:?}"),
            }),
        }
    }
    fn expect_int(&mut self) -> Result<i64> {
        match self.next() {
            Some(Tok::Int(v)) => Ok(v),
            other => Err(Error::Parse {
                line: self.line,
                col: self.col(),
                msg: format!("expected integer, got {other:?}"),
            }),
        }
    }
    fn expect_usize(&mut self) -> Result<usize> {
        let v = self.expect_int()?;
        if v < 0 {
            return self.err("expected a non-negative integer");
        }
        Ok(v as usize)
    }
    fn expect_sym(&mut self, c: char) -> Result<()> {
        match self.next() {
            Some(Tok::Sym(s)) if s == c => Ok(()),
            other => Err(Error::Parse {
                line: self.line,
                col: self.col(),
                msg: format!("expected {c:?}, got {other:?}"),
            }),
        }
    }
    fn expect_keyword(&mut self, kw: &str) -> Result<()> {
        match self.next() {
            Some(Tok::Ident(s)) if s == kw => Ok(()),
            other => Err(Error::Parse {
                line: self.line,
                col: self.col(),
                msg: format!("expected {kw:?}, got {other:?}"),
            }),
        }
    }
    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

// ---- polynomial expression parsing ----

/// expr := term (('+'|'-') term)* ; term := factor ('*' factor)* ;
/// factor := atom ('^' int)? ; atom := ident | number ['/' number] |
/// '(' expr ')' | '-' factor
fn parse_poly_expr(c: &mut Cursor, field: &Field, vars: &[String]) -> Result<MPoly> {
    let mut acc = parse_term(c, field, vars)?;
    loop {
        match c.peek() {
            Some(Tok::Sym('+')) => {
                c.next();
                acc = acc.add(&parse_term(c, field, vars)?);
            }
            Some(Tok::Sym('-')) => {
                c.next();
                acc = acc.sub(&parse_term(c, field, vars)?);
            }
            _ => return Ok(acc),
        }
    }
}

fn parse_term(c: &mut Cursor, field: &Field, vars: &[String]) -> Result<MPoly> {
    let mut acc = parse_factor(c, field, vars)?;
    while matches!(c.peek(), Some(Tok::Sym('*'))) {
        c.next();
        acc = acc.mul(&parse_factor(c, field, vars)?);
    }
    Ok(acc)
}

fn parse_factor(c: &mut Cursor, field: &Field, vars: &[String]) -> Result<MPoly> {
    let base = parse_atom(c, field, vars)?;
    if matches!(c.peek(), Some(Tok::Sym('^'))) {
        c.next();
        let e = c.expect_int()?;
        if e < 0 {
            return c.err("negative exponent");
        }
        return Ok(base.pow(e as u32));
    }
    Ok(base)
}

fn parse_atom(c: &mut Cursor, field: &Field, vars: &[String]) -> Result<MPoly> {
    match c.next() {
        Some(Tok::Ident(name)) => match vars.iter().position(|v| *v == name) {
            Some(i) => Ok(MPoly::var(field, vars.len(), i)),
            None => c.err(format!("unknown variable {name:?} (have {vars:?})")),
        },
        Some(Tok::Int(v)) => {
            // optional rational literal a/b
            if matches!(c.peek(), Some(Tok::Sym('/'))) {
                c.next();
                let d = c.expect_int()?;
                let q = field.from_ratio(v, d).map_err(|e| Error::Parse {
                    line: c.line,
                    col: c.col(),
                    msg: e.to_string(),
                })?;
                return Ok(MPoly::constant(field, vars.len(), q));
            }
            Ok(MPoly::constant(field, vars.len(), field.from_i64(v)))
        }
        Some(Tok::Sym('(')) => {
            let inner = parse_poly_expr(c, field, vars)?;
            c.expect_sym(')')?;
            Ok(inner)
        }
        Some(Tok::Sym('-')) => {
            let inner = parse_factor(c, field, vars)?;
            Ok(inner.neg())
        }
        other => c.err(format!("expected expression atom, got {other:?}")),
    }
}

fn mpoly_to_univariate(p: &MPoly, field: &Field) -> Poly {
    let mut coeffs: Vec<FieldElem> = Vec::new();
    for (e, c) in p.terms() {
        let deg = e[0] as usize;
        if coeffs.len() <= deg {
            coeffs.resize(deg + 1, field.zero());
        }
        coeffs[deg] = field.add(&coeffs[deg], c);
    }
    Poly::from_coeffs(field, coeffs)
}

fn parse_int_list(c: &mut Cursor) -> Result<Vec<usize>> {
    c.expect_sym('[')?;
    let mut out = Vec::new();
    loop {
        match c.peek() {
            Some(Tok::Sym(']')) => {
                c.next();
                return Ok(out);
            }
            _ => {
                out.push(c.expect_usize()?);
                if matches!(c.peek(), Some(Tok::Sym(','))) {
                    c.next();
                }
            }
        }
    }
}

fn parse_poly_rows(c: &mut Cursor, field: &Field, vars: &[String]) -> Result<Vec<Vec<MPoly>>> {
    c.expect_sym('[')?;
    let mut rows = Vec::new();
    loop {
        match c.peek() {
            Some(Tok::Sym(']')) => {
                c.next();
                return Ok(rows);
            }
            Some(Tok::Sym('[')) => {
                c.next();
                let mut row = Vec::new();
                loop {
                    if matches!(c.peek(), Some(Tok::Sym(']'))) {
                        c.next();
                        break;
                    }
                    row.push(parse_poly_expr(c, field, vars)?);
                    if matches!(c.peek(), Some(Tok::Sym(','))) {
                        c.next();
                    }
                }
                rows.push(row);
                if matches!(c.peek(), Some(Tok::Sym(','))) {
                    c.next();
                }
            }
            other => return c.err(format!("expected '[' or ']', got {other:?}")),
        }
    }
}

impl Session {
    pub fn field(&self, name: &str) -> Result<&Field> {
        self.fields
            .get(name)
            .ok_or_else(|| Error::Invariant(format!("unknown field {name:?}")))
    }
    pub fn algebra(&self, name: &str) -> Result<&Algebra> {
        self.algebras
            .get(name)
            .ok_or_else(|| Error::Invariant(format!("unknown algebra {name:?}")))
    }
    pub fn map(&self, name: &str) -> Result<&AlgebraMap> {
        self.maps
            .get(name)
            .ok_or_else(|| Error::Invariant(format!("unknown map {name:?}")))
    }
    pub fn module(&self, name: &str) -> Result<&ModuleDecl> {
        self.modules
            .get(name)
            .ok_or_else(|| Error::Invariant(format!("unknown module {name:?}")))
    }
}

/// Parse and verify a full session document.
pub fn parse_session(text: &str) -> Result<Session> {
    let mut s = Session::default();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let toks = tokenize(raw, lineno)?;
        if toks.is_empty() {
            continue;
        }
        let mut c = Cursor {
            toks,
            pos: 0,
            line: lineno,
        };
        let head = c.expect_ident()?;
        match head.as_str() {
            "field" => parse_field_decl(&mut c, &mut s)?,
            "algebra" => parse_algebra_decl(&mut c, &mut s)?,
            "map" => parse_map_decl(&mut c, &mut s)?,
            "module" => parse_module_decl(&mut c, &mut s)?,
            "set" => parse_config(&mut c, &mut s)?,
            "cmd" => {
                let cmd = parse_command(&mut c, &s)?;
                s.commands.push(cmd);
            }
            other => {
                return c.err(format!("unknown statement {other:?}"));
            }
        }
        if !c.at_end() {
            return c.err("trailing tokens");
        }
    }
    Ok(s)
}

fn check_fresh(s: &Session, name: &str, c: &Cursor) -> Result<()> {
    if s.fields.contains_key(name)
        || s.algebras.contains_key(name)
        || s.maps.contains_key(name)
        || s.modules.contains_key(name)
    {
        return Err(Error::Parse {
            line: c.line,
            col: c.col(),
            msg: format!("identifier {name:?} already declared"),
        });
    }
    Ok(())
}

fn lift_err(c: &Cursor, e: Error) -> Error {
    match e {
        Error::Parse { .. } => e,
        other => Error::Parse {
            line: c.line,
            col: c.col(),
            msg: other.to_string(),
        },
    }
}

fn parse_field_decl(c: &mut Cursor, s: &mut Session) -> Result<()> {
    let name = c.expect_ident()?;
    check_fresh(s, &name, c)?;
    c.expect_sym('=')?;
    let kind = c.expect_ident()?;
    let field = match kind.as_str() {
        "rationals" => Field::rationals(),
        "prime" => {
            let p = c.expect_usize()?;
            Field::prime(p as u64).map_err(|e| lift_err(c, e))?
        }
        "extend" => {
            let base_name = c.expect_ident()?;
            let base = s.field(&base_name).map_err(|e| lift_err(c, e))?.clone();
            c.expect_keyword("by")?;
            // the polynomial variable is whatever single identifier appears
            let gen = scan_single_variable(c)?;
            let expr = parse_poly_expr(c, &base, &[gen.clone()])?;
            let uni = mpoly_to_univariate(&expr, &base);
            Field::extension(base, uni.coeffs().to_vec(), &gen).map_err(|e| lift_err(c, e))?
        }
        other => return c.err(format!("unknown field kind {other:?}")),
    };
    s.fields.insert(name, field);
    Ok(())
}

/// Look ahead for the unique identifier used in a minimal polynomial.
fn scan_single_variable(c: &Cursor) -> Result<String> {
    let mut var = None;
    for sp in &c.toks[c.pos..] {
        if let Tok::Ident(name) = &sp.tok {
            match &var {
                None => var = Some(name.clone()),
                Some(v) if v == name => {}
                Some(v) => {
                    return Err(Error::Parse {
                        line: c.line,
                        col: sp.col,
                        msg: format!("minimal polynomial uses two variables {v:?} and {name:?}"),
                    })
                }
            }
        }
    }
    var.ok_or(Error::Parse {
        line: c.line,
        col: c.col(),
        msg: "minimal polynomial needs a variable".into(),
    })
}

fn parse_algebra_decl(c: &mut Cursor, s: &mut Session) -> Result<()> {
    let name = c.expect_ident()?;
    check_fresh(s, &name, c)?;
    c.expect_sym('=')?;
    c.expect_keyword("quotient")?;
    let field_name = c.expect_ident()?;
    let field = s.field(&field_name).map_err(|e| lift_err(c, e))?.clone();
    c.expect_sym('[')?;
    let mut vars = Vec::new();
    loop {
        match c.peek() {
            Some(Tok::Sym(']')) => {
                c.next();
                break;
            }
            _ => {
                vars.push(c.expect_ident()?);
                if matches!(c.peek(), Some(Tok::Sym(','))) {
                    c.next();
                }
            }
        }
    }
    c.expect_keyword("rels")?;
    c.expect_sym('[')?;
    let mut rels = Vec::new();
    loop {
        match c.peek() {
            Some(Tok::Sym(']')) => {
                c.next();
                break;
            }
            _ => {
                rels.push(parse_poly_expr(c, &field, &vars)?);
                if matches!(c.peek(), Some(Tok::Sym(','))) {
                    c.next();
                }
            }
        }
    }
    c.expect_keyword("trunc")?;
    let trunc = c.expect_usize()?;
    let var_refs: Vec<&str> = vars.iter().map(|v| v.as_str()).collect();
    let algebra =
        Algebra::from_presentation(&field, &var_refs, &rels, trunc).map_err(|e| lift_err(c, e))?;
    s.algebras.insert(name, algebra);
    Ok(())
}

fn parse_map_decl(c: &mut Cursor, s: &mut Session) -> Result<()> {
    let name = c.expect_ident()?;
    check_fresh(s, &name, c)?;
    c.expect_sym('=')?;
    let kind = c.expect_ident()?;
    match kind.as_str() {
        "tensor_extension" => {
            let field_name = c.expect_ident()?;
            let alg_name = c.expect_ident()?;
            let ext = s.field(&field_name).map_err(|e| lift_err(c, e))?.clone();
            let alg = s.algebra(&alg_name).map_err(|e| lift_err(c, e))?.clone();
            let (target, map) =
                Algebra::tensor_extension(&ext, &alg).map_err(|e| lift_err(c, e))?;
            // optional "as S" names the target algebra
            if matches!(c.peek(), Some(Tok::Ident(kw)) if kw == "as") {
                c.next();
                let tname = c.expect_ident()?;
                check_fresh(s, &tname, c)?;
                s.algebras.insert(tname, target);
            }
            s.maps.insert(name, map);
        }
        "quotient_map" => {
            let r_name = c.expect_ident()?;
            let s_name = c.expect_ident()?;
            let r = s.algebra(&r_name).map_err(|e| lift_err(c, e))?.clone();
            let t = s.algebra(&s_name).map_err(|e| lift_err(c, e))?.clone();
            let map = natural_quotient_map(&r, &t).map_err(|e| lift_err(c, e))?;
            s.maps.insert(name, map);
        }
        "identity" => {
            let a_name = c.expect_ident()?;
            let a = s.algebra(&a_name).map_err(|e| lift_err(c, e))?.clone();
            s.maps.insert(name, AlgebraMap::identity(&a));
        }
        other => return c.err(format!("unknown map constructor {other:?}")),
    }
    Ok(())
}

fn parse_module_decl(c: &mut Cursor, s: &mut Session) -> Result<()> {
    let name = c.expect_ident()?;
    check_fresh(s, &name, c)?;
    c.expect_sym('=')?;
    let kind = c.expect_ident()?;
    let decl = match kind.as_str() {
        "present" => {
            let alg_name = c.expect_ident()?;
            let algebra = s.algebra(&alg_name).map_err(|e| lift_err(c, e))?.clone();
            c.expect_keyword("cols")?;
            let gens = c.expect_usize()?;
            c.expect_keyword("rels")?;
            let rows = parse_poly_rows(c, algebra.field(), &algebra.var_names().to_vec())?;
            let mut elem_rows: Vec<Vec<AlgElem>> = Vec::new();
            for row in rows {
                let mut er = Vec::new();
                for p in row {
                    er.push(algebra.elem_from_mpoly(&p).map_err(|e| lift_err(c, e))?);
                }
                elem_rows.push(er);
            }
            let (module, proj) =
                FModule::present(&algebra, gens, &elem_rows).map_err(|e| lift_err(c, e))?;
            let f = algebra.field();
            let mut gen_cols = Mat::zero(f, module.dim(), gens);
            for i in 0..gens {
                let g = proj.mul(&FModule::free_generator(&algebra, gens, i));
                for r in 0..module.dim() {
                    gen_cols.set(r, i, g.get(r, 0).clone());
                }
            }
            ModuleDecl {
                module,
                gens: gen_cols,
            }
        }
        "free" => {
            let alg_name = c.expect_ident()?;
            let algebra = s.algebra(&alg_name).map_err(|e| lift_err(c, e))?.clone();
            let rank = c.expect_usize()?;
            let module = FModule::free(&algebra, rank);
            let f = algebra.field();
            let mut gen_cols = Mat::zero(f, module.dim(), rank);
            for i in 0..rank {
                let g = FModule::free_generator(&algebra, rank, i);
                for r in 0..module.dim() {
                    gen_cols.set(r, i, g.get(r, 0).clone());
                }
            }
            ModuleDecl {
                module,
                gens: gen_cols,
            }
        }
        "residue" => {
            let alg_name = c.expect_ident()?;
            let algebra = s.algebra(&alg_name).map_err(|e| lift_err(c, e))?.clone();
            let module = FModule::residue(&algebra);
            let f = algebra.field();
            let gens = Mat::identity(f, module.dim());
            ModuleDecl { module, gens }
        }
        "base_change" => {
            let map_name = c.expect_ident()?;
            let mod_name = c.expect_ident()?;
            let phi = s.map(&map_name).map_err(|e| lift_err(c, e))?.clone();
            let md = s.module(&mod_name).map_err(|e| lift_err(c, e))?.clone();
            let (module, iota) = FModule::base_change(&phi, &md.module);
            let gens = iota.mul(&md.gens);
            ModuleDecl { module, gens }
        }
        "restrict" => {
            let map_name = c.expect_ident()?;
            let mod_name = c.expect_ident()?;
            let phi = s.map(&map_name).map_err(|e| lift_err(c, e))?.clone();
            let md = s.module(&mod_name).map_err(|e| lift_err(c, e))?.clone();
            let module = FModule::restrict(&phi, &md.module);
            ModuleDecl {
                module,
                gens: md.gens,
            }
        }
        other => return c.err(format!("unknown module constructor {other:?}")),
    };
    s.modules.insert(name, decl);
    Ok(())
}

fn parse_config(c: &mut Cursor, s: &mut Session) -> Result<()> {
    let key = c.expect_ident()?;
    c.expect_sym('=')?;
    let v = c.expect_int()?;
    match key.as_str() {
        "seed" => s.config.seed = v as u64,
        "ext_range" => {
            if !(0..=32).contains(&v) {
                return c.err("ext_range must lie in 0..=32");
            }
            s.config.ext_range = v as usize;
        }
        "dimension_cap" => {
            if !(1..=64).contains(&v) {
                return c.err("dimension_cap must lie in 1..=64");
            }
            s.config.dimension_cap = v as usize;
        }
        "precision" => {
            if !(2..=64).contains(&v) {
                return c.err("precision must lie in 2..=64");
            }
            s.config.precision = v as usize;
        }
        other => return c.err(format!("unknown config key {other:?}")),
    }
    Ok(())
}

fn parse_command(c: &mut Cursor, s: &Session) -> Result<Command> {
    let verb = c.expect_ident()?;
    let cmd = match verb.as_str() {
        "dagger" => Command::Dagger {
            map: c.expect_ident()?,
        },
        "flat" => Command::Flat {
            map: c.expect_ident()?,
        },
        "ascend" => Command::Ascend {
            map: c.expect_ident()?,
            module: c.expect_ident()?,
        },
        "ext" => Command::Ext {
            m: c.expect_ident()?,
            n: c.expect_ident()?,
            degree: c.expect_usize()?,
        },
        "krs" => Command::Krs {
            module: c.expect_ident()?,
        },
        "iso" => Command::Iso {
            m: c.expect_ident()?,
            n: c.expect_ident()?,
        },
        "extended" => Command::Extended {
            map: c.expect_ident()?,
            module: c.expect_ident()?,
        },
        "matrix_equiv" => {
            let map_name = c.expect_ident()?;
            let phi = s.map(&map_name).map_err(|e| lift_err(c, e))?;
            // the scalar is an expression in the extension generator over the
            // target's scalar extension field
            let source_field = phi.source().field().clone();
            let gen_name =
                phi.target()
                    .var_names()
                    .first()
                    .cloned()
                    .ok_or_else(|| Error::Parse {
                        line: c.line,
                        col: c.col(),
                        msg: "target algebra has no extension generator".into(),
                    })?;
            let expr = parse_poly_expr(c, &source_field, &[gen_name.clone()])?;
            let uni = mpoly_to_univariate(&expr, &source_field);
            // assemble the field element in base[t]/(minpoly)
            let ext_field = Field::extension(
                source_field.clone(),
                minimal_poly_of_generator(phi)?,
                &gen_name,
            )
            .map_err(|e| lift_err(c, e))?;
            let mut coords = vec![source_field.zero(); ext_field.ext_degree()];
            for (i, co) in uni.coeffs().iter().enumerate() {
                if i >= coords.len() {
                    return c.err("scalar expression exceeds the extension degree");
                }
                coords[i] = co.clone();
            }
            Command::MatrixEquiv {
                map: map_name,
                scalar: FieldElem::Ext(coords),
                field: ext_field,
            }
        }
        "separability" => Command::Separability {
            map: c.expect_ident()?,
        },
        "summand" => Command::Summand {
            map: c.expect_ident()?,
            module: c.expect_ident()?,
        },
        "vmax" => {
            let map_name = c.expect_ident()?;
            let mod_name = c.expect_ident()?;
            c.expect_keyword("span")?;
            let md = s.module(&mod_name).map_err(|e| lift_err(c, e))?;
            let algebra = md.module.algebra().clone();
            let rows = parse_poly_rows(c, algebra.field(), &algebra.var_names().to_vec())?;
            Command::Vmax {
                map: map_name,
                module: mod_name,
                gens: rows,
            }
        }
        "gallery" => {
            // gallery ids look like 2.8; the tokenizer splits them, so accept
            // int '.' int or an identifier
            let id = match c.next() {
                Some(Tok::Int(major)) => {
                    // the '.' was consumed as part of an unexpected shape;
                    // gallery ids are INT '.' INT but '.' is only valid in
                    // identifiers, so re-lex from the raw pieces
                    match c.next() {
                        Some(Tok::Sym('.')) => format!("{major}.{}", c.expect_int()?),
                        other => {
                            return c.err(format!("expected gallery id, got {other:?}"));
                        }
                    }
                }
                Some(Tok::Ident(id)) => id,
                other => return c.err(format!("expected gallery id, got {other:?}")),
            };
            let mut params = BTreeMap::new();
            while !c.at_end() {
                let key = c.expect_ident()?;
                c.expect_sym('=')?;
                let v = c.expect_int()?;
                params.insert(key, v);
            }
            Command::Gallery { id, params }
        }
        "pid_classify" => {
            let field = Field::rationals();
            c.expect_keyword("gens")?;
            let gens = c.expect_usize()?;
            c.expect_keyword("rels")?;
            let rows = parse_poly_rows(c, &field, &["x".to_string()])?;
            let rows: Vec<Vec<Poly>> = rows
                .into_iter()
                .map(|r| {
                    r.into_iter()
                        .map(|p| mpoly_to_univariate(&p, &field))
                        .collect()
                })
                .collect();
            Command::PidClassify { gens, rows }
        }
        "pid_ascent" => {
            c.expect_keyword("free")?;
            let free = c.expect_usize()?;
            c.expect_keyword("tors")?;
            let torsion = parse_int_list(c)?;
            Command::PidAscent { free, torsion }
        }
        "pid_ext" => {
            c.expect_keyword("free")?;
            let a1 = c.expect_usize()?;
            c.expect_keyword("tors")?;
            let t1 = parse_int_list(c)?;
            c.expect_keyword("free")?;
            let a2 = c.expect_usize()?;
            c.expect_keyword("tors")?;
            let t2 = parse_int_list(c)?;
            c.expect_keyword("i")?;
            c.expect_sym('=')?;
            let degree = c.expect_usize()?;
            Command::PidExt {
                m: (a1, t1),
                n: (a2, t2),
                degree,
            }
        }
        "pid_extend" => {
            c.expect_keyword("free")?;
            let free = c.expect_usize()?;
            c.expect_keyword("tors")?;
            let torsion = parse_int_list(c)?;
            Command::PidExtend { free, torsion }
        }
        "pid_prop32" => {
            let a = c.expect_usize()?;
            let b = c.expect_usize()?;
            let class = match c.next() {
                Some(Tok::Ident(kw)) if kw == "split" => ExtensionClass::Split,
                Some(Tok::Int(v)) if v >= 0 => ExtensionClass::XPower(v as usize),
                other => {
                    return c.err(format!("expected class (split or exponent), got {other:?}"))
                }
            };
            Command::PidProp32 { a, b, class }
        }
        "pid_vmax" => {
            let field = Field::rationals();
            c.expect_keyword("tors")?;
            let torsion = parse_int_list(c)?;
            c.expect_keyword("free")?;
            let free = c.expect_usize()?;
            c.expect_keyword("gens")?;
            let rows = parse_poly_rows(c, &field, &["x".to_string()])?;
            c.expect_keyword("prec")?;
            let prec = c.expect_usize()?;
            let mut gens = Vec::new();
            for row in rows {
                if row.len() != torsion.len() + free {
                    return c.err(format!(
                        "generator must have {} entries",
                        torsion.len() + free
                    ));
                }
                let polys: Vec<Poly> = row.iter().map(|p| mpoly_to_univariate(p, &field)).collect();
                gens.push(PidVector {
                    torsion: polys[..torsion.len()].to_vec(),
                    free: polys[torsion.len()..].to_vec(),
                });
            }
            Command::PidVmax {
                torsion,
                free,
                gens,
                prec,
            }
        }
        other => return c.err(format!("unknown command {other:?}")),
    };
    // eagerly validate referenced names
    validate_command_refs(&cmd, s).map_err(|e| lift_err(c, e))?;
    Ok(cmd)
}

fn minimal_poly_of_generator(phi: &AlgebraMap) -> Result<Vec<FieldElem>> {
    // the tensor-extension target stores its scalar extension implicitly:
    // recover the minimal polynomial of the generator label from the algebra
    let s = phi.target();
    let gen = s
        .label_index(s.var_names().first().map(|x| x.as_str()).unwrap_or(""))
        .ok_or_else(|| Error::Invariant("target has no extension generator".into()))?;
    let mp = crate::mat::min_poly(s.left_mul(gen));
    Ok(mp)
}

fn validate_command_refs(cmd: &Command, s: &Session) -> Result<()> {
    let need_map = |n: &String| s.map(n).map(|_| ());
    let need_mod = |n: &String| s.module(n).map(|_| ());
    match cmd {
        Command::Dagger { map } | Command::Flat { map } | Command::Separability { map } => {
            need_map(map)
        }
        Command::Ascend { map, module }
        | Command::Extended { map, module }
        | Command::Summand { map, module }
        | Command::Vmax { map, module, .. } => {
            need_map(map)?;
            need_mod(module)
        }
        Command::Ext { m, n, .. } | Command::Iso { m, n } => {
            need_mod(m)?;
            need_mod(n)
        }
        Command::Krs { module } => need_mod(module),
        Command::MatrixEquiv { map, .. } => need_map(map),
        Command::Gallery { id, .. } => match id.as_str() {
            "2.8" | "2.9" | "2.10" | "2.11" => Ok(()),
            other => Err(Error::Invariant(format!("unknown gallery id {other:?}"))),
        },
        _ => Ok(()),
    }
}

/// PidVector is re-exported for the runner.
pub use crate::pidmodel::PidVector as PidGen;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_parses() {
        let s = parse_session("").unwrap();
        assert!(s.commands.is_empty());
        assert!(s.fields.is_empty());
    }

    #[test]
    fn example_objects_parse() {
        let text = "\
# the coefficient extension example
field q = rationals
field qi = extend q by t^2+1
algebra R = quotient q [X,Y] rels [] trunc 2
map phi = tensor_extension qi R as S
module N = present S cols 1 rels [[X + t*Y]]
cmd extended phi N
";
        let s = parse_session(text).unwrap();
        assert_eq!(s.fields.len(), 2);
        assert_eq!(s.algebras.len(), 2);
        assert_eq!(s.maps.len(), 1);
        assert_eq!(s.modules.len(), 1);
        assert_eq!(s.commands.len(), 1);
        assert_eq!(s.algebra("R").unwrap().dim(), 3);
        assert_eq!(s.algebra("S").unwrap().dim(), 6);
        assert_eq!(s.module("N").unwrap().module.dim(), 4);
    }

    #[test]
    fn surjection_session_parses() {
        let text = "\
field q = rationals
algebra R = quotient q [x] rels [] trunc 4
algebra S = quotient q [x] rels [] trunc 2
map phi = quotient_map R S
module M = present R cols 1 rels [[x^2]]
cmd ascend phi M
cmd dagger phi
";
        let s = parse_session(text).unwrap();
        assert!(s.map("phi").unwrap().is_surjective());
        assert_eq!(s.module("M").unwrap().module.dim(), 2);
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse_session("field q = rationols").err().unwrap();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn bad_relation_is_rejected() {
        // relations forcing 1 into the ideal
        let text = "\
field q = rationals
algebra R = quotient q [x] rels [1 - x] trunc 3
";
        // the unit 1 - x collapses the ring
        assert!(parse_session(text).is_err());
    }

    #[test]
    fn duplicate_identifier_rejected() {
        let text = "\
field q = rationals
field q = rationals
";
        assert!(parse_session(text).is_err());
    }

    #[test]
    fn unknown_reference_rejected() {
        let text = "\
field q = rationals
algebra R = quotient q [x] rels [] trunc 2
cmd krs M
";
        assert!(parse_session(text).is_err());
    }

    #[test]
    fn gallery_and_pid_commands_parse() {
        let text = "\
set seed = 7
cmd gallery 2.11 n=3 L=5
cmd pid_classify gens 2 rels [[x, x^2], [x^2, x^3]]
cmd pid_ascent free 1 tors [2]
cmd pid_ext free 0 tors [1] free 1 tors [] i=1
cmd pid_prop32 1 1 0
cmd pid_vmax tors [2] free 1 gens [[1, 0], [0, 1]] prec 8
";
        let s = parse_session(text).unwrap();
        assert_eq!(s.config.seed, 7);
        assert_eq!(s.commands.len(), 6);
    }
}
