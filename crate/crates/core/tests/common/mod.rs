#![allow(dead_code)]

//! Random miniature Java projects with independently computed expectations.
//!
//! The generator keeps an abstract description of every project it renders,
//! so the oracles below never look at the parsed `CodeModel`.

use std::collections::BTreeSet;

use polytest_core::code_model::{parse_unit, CodeModel, Language};
use rand::seq::SliceRandom;
use rand::Rng;

pub const LIB_TYPES: [&str; 4] = ["ext.L0", "ext.L1", "ext.L2", "ext.L3"];
pub const SERVICE_BASE: &str = "ext.Base";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ty {
    App(usize),
    Lib(usize),
    Int,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CallKind {
    SelfCall(usize),
    New(Ty),
    Static(Ty),
    OnField(usize),
    OnParam(usize),
}

#[derive(Debug, Clone)]
pub struct GenCall {
    pub kind: CallKind,
    pub line: u32,
}

#[derive(Debug, Clone)]
pub struct GenCtor {
    pub params: Vec<Ty>,
    pub private: bool,
    pub calls: Vec<GenCall>,
}

#[derive(Debug, Clone)]
pub struct GenMethod {
    pub name: String,
    pub private: bool,
    pub is_static: bool,
    pub overrides: bool,
    pub params: Vec<Ty>,
    pub calls: Vec<GenCall>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Super {
    App(usize),
    Base,
}

#[derive(Debug, Clone)]
pub struct GenType {
    pub name: String,
    pub superclass: Option<Super>,
    pub fields: Vec<(String, Ty)>,
    pub ctors: Vec<GenCtor>,
    pub methods: Vec<GenMethod>,
}

#[derive(Debug, Clone)]
pub struct GenProject {
    pub types: Vec<GenType>,
    pub focal: usize,
    pub focal_method: usize,
    /// Qualified names in the mockable-API allowlist.
    pub apis: BTreeSet<String>,
    /// Allowlist file text (may use `ext.*`).
    pub apis_text: String,
    pub sources: Vec<(String, String)>,
}

pub fn ty_name(types: &[GenType], t: Ty) -> String {
    match t {
        Ty::App(i) => format!("gen.{}", types[i].name),
        Ty::Lib(i) => LIB_TYPES[i].to_string(),
        Ty::Int => "int".to_string(),
    }
}

fn ty_source(types: &[GenType], t: Ty) -> String {
    match t {
        Ty::App(i) => types[i].name.clone(),
        Ty::Lib(i) => LIB_TYPES[i].trim_start_matches("ext.").to_string(),
        Ty::Int => "int".to_string(),
    }
}

fn random_ty<R: Rng>(rng: &mut R, n_app: usize, allow_int: bool) -> Ty {
    let roll = rng.gen_range(0..10);
    if allow_int && roll < 2 {
        Ty::Int
    } else if roll < 6 {
        Ty::App(rng.gen_range(0..n_app))
    } else {
        Ty::Lib(rng.gen_range(0..LIB_TYPES.len()))
    }
}

fn object_ty<R: Rng>(rng: &mut R, n_app: usize) -> Ty {
    random_ty(rng, n_app, false)
}

/// A project of at most 6 types, at most 4 fields per type and at most 10
/// call sites in total.
pub fn generate<R: Rng>(rng: &mut R) -> GenProject {
    let n_app = rng.gen_range(1..=6);
    let mut types: Vec<GenType> = (0..n_app)
        .map(|i| GenType {
            name: format!("T{i}"),
            superclass: None,
            fields: Vec::new(),
            ctors: Vec::new(),
            methods: Vec::new(),
        })
        .collect();
    for i in 0..n_app {
        types[i].superclass = match rng.gen_range(0..6) {
            0 if i > 0 => Some(Super::App(rng.gen_range(0..i))),
            1 => Some(Super::Base),
            _ => None,
        };
        let n_fields = rng.gen_range(0..=4);
        types[i].fields = (0..n_fields).map(|k| (format!("f{k}"), object_ty(rng, n_app))).collect();
        let n_ctors = rng.gen_range(0..=2);
        for _ in 0..n_ctors {
            // distinct arities keep constructor keys unique
            let arity = types[i].ctors.len() + rng.gen_range(0..=1) * 2;
            let params = (0..arity).map(|_| random_ty(rng, n_app, true)).collect();
            types[i].ctors.push(GenCtor { params, private: rng.gen_bool(0.15), calls: Vec::new() });
        }
        let n_methods = rng.gen_range(1..=4);
        for k in 0..n_methods {
            let private = rng.gen_bool(0.35);
            let arity = rng.gen_range(0..=2);
            types[i].methods.push(GenMethod {
                name: format!("m{k}"),
                private,
                is_static: false,
                overrides: !private && rng.gen_bool(0.2),
                params: (0..arity).map(|_| random_ty(rng, n_app, true)).collect(),
                calls: Vec::new(),
            });
        }
    }

    let n_calls = rng.gen_range(0..=10);
    for _ in 0..n_calls {
        let t = rng.gen_range(0..n_app);
        let n_members = types[t].ctors.len() + types[t].methods.len();
        let member = rng.gen_range(0..n_members);
        let (params, fields_len, methods_len) =
            if member < types[t].ctors.len() {
                (types[t].ctors[member].params.clone(), types[t].fields.len(), types[t].methods.len())
            } else {
                (types[t].methods[member - types[t].ctors.len()].params.clone(), types[t].fields.len(), types[t].methods.len())
            };
        let object_params: Vec<usize> = params.iter().enumerate().filter(|(_, p)| **p != Ty::Int).map(|(i, _)| i).collect();
        let kind = loop {
            match rng.gen_range(0..5) {
                0 => break CallKind::SelfCall(rng.gen_range(0..methods_len)),
                1 => break CallKind::New(object_ty(rng, n_app)),
                2 => break CallKind::Static(object_ty(rng, n_app)),
                3 if fields_len > 0 => break CallKind::OnField(rng.gen_range(0..fields_len)),
                4 if !object_params.is_empty() => break CallKind::OnParam(*object_params.choose(rng).unwrap()),
                _ => {}
            }
        };
        let call = GenCall { kind, line: 0 };
        if member < types[t].ctors.len() {
            types[t].ctors[member].calls.push(call);
        } else {
            let m = member - types[t].ctors.len();
            types[t].methods[m].calls.push(call);
        }
    }

    let focal = rng.gen_range(0..n_app);
    let candidates: Vec<usize> =
        types[focal].methods.iter().enumerate().filter(|(_, m)| !m.private).map(|(i, _)| i).collect();
    let focal_method = candidates.choose(rng).copied().unwrap_or(0);

    let mut apis = BTreeSet::new();
    let mut lines = Vec::new();
    if rng.gen_bool(0.2) {
        lines.push("ext.*".to_string());
        apis.extend(LIB_TYPES.iter().map(|s| s.to_string()));
    }
    for i in 0..n_app {
        if rng.gen_bool(0.3) {
            let name = format!("gen.T{i}");
            lines.push(name.clone());
            apis.insert(name);
        }
    }
    for l in LIB_TYPES {
        if rng.gen_bool(0.4) {
            lines.push(l.to_string());
            apis.insert(l.to_string());
        }
    }
    lines.shuffle(rng);
    let apis_text = lines.join("\n");

    let sources = (0..n_app).map(|i| render(&mut types, i)).collect();
    GenProject { types, focal, focal_method, apis, apis_text, sources }
}

fn render(types: &mut [GenType], i: usize) -> (String, String) {
    let snapshot = types.to_vec();
    let src_ty = |t: Ty| ty_source(&snapshot, t);
    let t = &mut types[i];
    let mut out = String::new();
    let mut line = 1u32;
    let emit = |out: &mut String, s: &str, line: &mut u32| {
        out.push_str(s);
        out.push('\n');
        *line += 1;
    };
    emit(&mut out, "package gen;", &mut line);
    for l in LIB_TYPES {
        emit(&mut out, &format!("import {l};"), &mut line);
    }
    emit(&mut out, "import ext.Base;", &mut line);
    let ext = match t.superclass {
        Some(Super::App(j)) => format!(" extends {}", snapshot[j].name),
        Some(Super::Base) => " extends Base".to_string(),
        None => String::new(),
    };
    emit(&mut out, &format!("public class {}{ext} {{", t.name), &mut line);
    for (name, ty) in &t.fields {
        emit(&mut out, &format!("    private {} {name};", src_ty(*ty)), &mut line);
    }
    let method_arity: Vec<usize> = t.methods.iter().map(|m| m.params.len()).collect();
    let method_names: Vec<String> = t.methods.iter().map(|m| m.name.clone()).collect();
    let field_names: Vec<String> = t.fields.iter().map(|f| f.0.clone()).collect();
    let render_calls = |calls: &mut Vec<GenCall>, out: &mut String, line: &mut u32| {
        for c in calls.iter_mut() {
            let stmt = match c.kind {
                CallKind::SelfCall(m) => {
                    let args = vec!["null"; method_arity[m]].join(", ");
                    format!("        {}({args});", method_names[m])
                }
                CallKind::New(ty) => format!("        new {}();", src_ty(ty)),
                CallKind::Static(ty) => format!("        {}.util();", src_ty(ty)),
                CallKind::OnField(f) => format!("        {}.op();", field_names[f]),
                CallKind::OnParam(p) => format!("        a{p}.op();"),
            };
            c.line = *line;
            out.push_str(&stmt);
            out.push('\n');
            *line += 1;
        }
    };
    let params_src = |params: &[Ty]| {
        params.iter().enumerate().map(|(k, p)| format!("{} a{k}", src_ty(*p))).collect::<Vec<_>>().join(", ")
    };
    let name = t.name.clone();
    for c in t.ctors.iter_mut() {
        let vis = if c.private { "private" } else { "public" };
        emit(&mut out, &format!("    {vis} {name}({}) {{", params_src(&c.params)), &mut line);
        render_calls(&mut c.calls, &mut out, &mut line);
        emit(&mut out, "    }", &mut line);
    }
    for m in t.methods.iter_mut() {
        if m.overrides {
            emit(&mut out, "    @Override", &mut line);
        }
        let vis = if m.private { "private" } else { "public" };
        emit(&mut out, &format!("    {vis} void {}({}) {{", m.name, params_src(&m.params)), &mut line);
        render_calls(&mut m.calls, &mut out, &mut line);
        emit(&mut out, "    }", &mut line);
    }
    emit(&mut out, "}", &mut line);
    (format!("gen/{name}.java"), out)
}

impl GenProject {
    pub fn model(&self) -> CodeModel {
        let units = self
            .sources
            .iter()
            .map(|(p, s)| parse_unit(p, s, Language::Java).unwrap_or_else(|e| panic!("{e}\n{s}")))
            .collect();
        CodeModel::build(units).expect("unique type names")
    }

    pub fn focal_qname(&self) -> String {
        format!("gen.{}", self.types[self.focal].name)
    }

    fn universe(&self) -> Vec<Ty> {
        (0..self.types.len()).map(Ty::App).chain((0..LIB_TYPES.len()).map(Ty::Lib)).collect()
    }

    fn index(&self, t: Ty) -> Option<usize> {
        match t {
            Ty::App(i) => Some(i),
            Ty::Lib(i) => Some(self.types.len() + i),
            Ty::Int => None,
        }
    }

    pub fn in_apis(&self, t: Ty) -> bool {
        t != Ty::Int && self.apis.contains(&ty_name(&self.types, t))
    }

    /// Expected mockable types: allowlisted types reachable from the focal
    /// class and focal-method parameters via constructor parameters.
    pub fn oracle_mocked_types(&self) -> BTreeSet<String> {
        let universe = self.universe();
        let n = universe.len();
        let mut reach = vec![vec![false; n]; n];
        for (i, t) in self.types.iter().enumerate() {
            for c in &t.ctors {
                for p in &c.params {
                    if let Some(j) = self.index(*p) {
                        reach[i][j] = true;
                    }
                }
            }
        }
        for i in 0..n {
            reach[i][i] = true;
        }
        warshall(&mut reach);
        let mut seeds = vec![self.focal];
        seeds.extend(self.types[self.focal].methods[self.focal_method].params.iter().filter_map(|p| self.index(*p)));
        universe
            .iter()
            .enumerate()
            .filter(|(j, t)| seeds.iter().any(|s| reach[*s][*j]) && self.in_apis(**t))
            .map(|(_, t)| ty_name(&self.types, *t))
            .collect()
    }

    pub fn oracle_mocked_fields(&self) -> BTreeSet<String> {
        self.types[self.focal]
            .fields
            .iter()
            .filter(|(_, t)| self.in_apis(*t))
            .map(|(n, _)| n.clone())
            .collect()
    }

    fn supertypes(&self, i: usize) -> Vec<Super> {
        let mut out = Vec::new();
        let mut cur = self.types[i].superclass;
        while let Some(s) = cur {
            out.push(s);
            cur = match s {
                Super::App(j) => self.types[j].superclass,
                Super::Base => None,
            };
        }
        out
    }

    fn method_overridden(&self, m: &GenMethod) -> bool {
        if m.private || m.is_static {
            return false;
        }
        m.overrides
            || self.supertypes(self.focal).iter().any(|s| match s {
                Super::App(j) => self.types[*j].methods.iter().any(|o| o.name == m.name && o.params.len() == m.params.len()),
                Super::Base => false,
            })
    }

    /// Lines of expected (constructor, static, api) call sites.
    pub fn oracle_mocking_scope(&self) -> [BTreeSet<u32>; 3] {
        let t = &self.types[self.focal];
        let n = t.methods.len();
        let mut reach = vec![vec![false; n]; n];
        for (i, m) in t.methods.iter().enumerate() {
            for c in &m.calls {
                if let CallKind::SelfCall(j) = c.kind {
                    reach[i][j] = true;
                }
            }
        }
        warshall(&mut reach);
        let service = self.supertypes(self.focal).contains(&Super::Base);
        let mut members: Vec<(&[GenCall], &[Ty])> = Vec::new();
        for c in &t.ctors {
            members.push((&c.calls, &c.params));
        }
        for (i, m) in t.methods.iter().enumerate() {
            let in_scope =
                i == self.focal_method || reach[self.focal_method][i] || (service && self.method_overridden(m));
            if in_scope {
                members.push((&m.calls, &m.params));
            }
        }
        let mut out: [BTreeSet<u32>; 3] = Default::default();
        for (calls, params) in members {
            for c in calls {
                match c.kind {
                    CallKind::New(ty) if self.in_apis(ty) => {
                        out[0].insert(c.line);
                    }
                    CallKind::Static(ty) if self.in_apis(ty) => {
                        out[1].insert(c.line);
                    }
                    CallKind::OnField(f) if self.in_apis(t.fields[f].1) => {
                        out[2].insert(c.line);
                    }
                    CallKind::OnParam(p) if self.in_apis(params[p]) => {
                        out[2].insert(c.line);
                    }
                    _ => {}
                }
            }
        }
        out
    }

    /// Signature keys of constructors a test may call, for the application
    /// types reachable from `seeds` through constructor parameters.
    pub fn oracle_constructor_keys(&self, seeds: &[usize]) -> BTreeSet<String> {
        let n = self.types.len();
        let mut reach = vec![vec![false; n]; n];
        for (i, t) in self.types.iter().enumerate() {
            for c in t.ctors.iter().filter(|c| !c.private) {
                for p in &c.params {
                    if let Ty::App(j) = p {
                        reach[i][*j] = true;
                    }
                }
            }
            reach[i][i] = true;
        }
        warshall(&mut reach);
        let mut out = BTreeSet::new();
        for j in 0..n {
            if !seeds.iter().any(|s| reach[*s][j]) {
                continue;
            }
            let t = &self.types[j];
            if t.ctors.is_empty() {
                out.insert(format!("gen.{0}#{0}()", t.name));
            }
            for c in t.ctors.iter().filter(|c| !c.private) {
                let params = c.params.iter().map(|p| ty_source(&self.types, *p)).collect::<Vec<_>>().join(",");
                out.insert(format!("gen.{0}#{0}({params})", t.name));
            }
        }
        out
    }
}

pub fn warshall(reach: &mut [Vec<bool>]) {
    let n = reach.len();
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
}

pub mod fixtures;
