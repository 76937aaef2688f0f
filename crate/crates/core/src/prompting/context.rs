use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::Slot;
use crate::analysis::{
    build_mock_skeleton, collect_auxiliary_methods, collect_imported_constructors, collect_relevant_constructors,
    find_private_call_chains, plan_mocks, select_fewshot_examples, AuxiliaryMethods, CallChain, ConfigError,
    ConstructorOptions, ConstructorSig, FewShotConfig, FewShotExample, FocalTarget, MockPlan, ModuleTarget, StubKind,
    TestSkeleton, TypeAllowlist,
};
use crate::code_model::{CodeModel, Language};

#[derive(Debug, Clone)]
pub enum FocalUnit<'m> {
    Method(FocalTarget<'m>),
    Module(ModuleTarget<'m>),
}

#[derive(Debug, Clone, Default)]
pub struct ContextOptions {
    pub constructors: ConstructorOptions,
    /// Mockable third-party types; mocking is off when empty.
    pub api_allowlist: TypeAllowlist,
    pub service_entries: TypeAllowlist,
    pub fewshot: FewShotConfig,
}

/// Everything gathered for one generation target.
#[derive(Debug, Clone)]
pub struct FocalContext<'m> {
    pub language: Language,
    pub target: FocalUnit<'m>,
    /// Path of the focal unit relative to the project root.
    pub focal_path: String,
    pub focal_source: String,
    /// Source of the abstract superclass an inherited focal method lives in.
    pub inherited_source: Option<(String, String)>,
    /// File and inclusive 1-based line range measured for coverage: the
    /// focal method for Java (in the declaring file), the whole module for
    /// Python.
    pub focal_region: (String, u32, u32),
    pub constructors: Vec<ConstructorSig>,
    pub accessors: AuxiliaryMethods<'m>,
    pub call_chains: Vec<CallChain<'m>>,
    pub mock_plan: Option<MockPlan>,
    pub skeleton: Option<TestSkeleton>,
    pub fewshot: Vec<FewShotExample>,
}

impl<'m> FocalContext<'m> {
    pub fn for_method(target: FocalTarget<'m>, model: &'m CodeModel, options: &ContextOptions) -> Self {
        let unit = model.unit_of_type(&target.focal_class.qualified_name);
        let inherited_source = if target.inherited_from_abstract {
            target.focal_method.owner.as_deref().and_then(|o| {
                let decl = model.type_decl(o)?;
                let u = model.unit_of_type(o)?;
                Some((decl.qualified_name.clone(), u.type_source(decl).to_string()))
            })
        } else {
            None
        };
        let mock_plan = if options.api_allowlist.is_empty() {
            None
        } else {
            Some(plan_mocks(&target, &options.api_allowlist, &options.service_entries, model)).filter(|p| !p.is_empty())
        };
        let skeleton = mock_plan.as_ref().and_then(|p| build_mock_skeleton(p, &target).ok());
        let declaring = target.focal_method.owner.as_deref().and_then(|o| model.unit_of_type(o)).or(unit);
        let span = target.focal_method.span;
        let focal_region = (declaring.map(|u| u.path.clone()).unwrap_or_default(), span.start_line, span.end_line);
        FocalContext {
            language: Language::Java,
            focal_path: unit.map(|u| u.path.clone()).unwrap_or_default(),
            focal_source: unit.map(|u| u.source_text.clone()).unwrap_or_default(),
            inherited_source,
            focal_region,
            constructors: collect_relevant_constructors(&target, model, options.constructors),
            accessors: collect_auxiliary_methods(&target, model),
            call_chains: find_private_call_chains(target.focal_class),
            mock_plan,
            skeleton,
            fewshot: Vec::new(),
            target: FocalUnit::Method(target),
        }
    }

    pub fn for_module(
        target: ModuleTarget<'m>,
        model: &'m CodeModel,
        options: &ContextOptions,
    ) -> Result<Self, ConfigError> {
        Ok(FocalContext {
            language: Language::Python,
            focal_path: target.module.path.clone(),
            focal_source: target.module.source_text.clone(),
            inherited_source: None,
            focal_region: (target.module.path.clone(), 1, target.module.source_text.lines().count().max(1) as u32),
            constructors: collect_imported_constructors(target.module, model),
            accessors: AuxiliaryMethods::default(),
            call_chains: Vec::new(),
            mock_plan: None,
            skeleton: None,
            fewshot: select_fewshot_examples(&options.fewshot)?,
            target: FocalUnit::Module(target),
        })
    }

    /// Stable identifier, also used as the output directory name.
    pub fn target_id(&self) -> String {
        match &self.target {
            FocalUnit::Method(t) => t.id(),
            FocalUnit::Module(m) => m.name().to_string(),
        }
    }

    pub fn focal_summary(&self) -> String {
        match &self.target {
            FocalUnit::Method(t) => {
                format!("method `{}` of class `{}`", t.focal_method.signature(), t.focal_class.qualified_name)
            }
            FocalUnit::Module(m) => format!("module `{}`", m.name()),
        }
    }

    fn fence(&self, text: &str) -> String {
        format!("```{}\n{}\n```", self.language.as_str(), text.trim_end())
    }

    fn focal_section(&self) -> String {
        let mut out = String::new();
        match &self.target {
            FocalUnit::Method(t) => {
                let _ = writeln!(out, "Focal class `{}` (file {}):", t.focal_class.qualified_name, self.focal_path);
                let _ = writeln!(out, "{}", self.fence(&self.focal_source));
                if let Some((owner, src)) = &self.inherited_source {
                    let _ = writeln!(out, "The focal method is inherited from abstract class `{owner}`:");
                    let _ = writeln!(out, "{}", self.fence(src));
                }
                let _ = write!(out, "Focal method: `{}`", t.focal_method.signature());
            }
            FocalUnit::Module(m) => {
                let _ = writeln!(out, "Focal module `{}` (file {}):", m.name(), self.focal_path);
                let _ = write!(out, "{}", self.fence(&self.focal_source));
            }
        }
        out
    }

    /// Slot contents for this context; empty analyses produce no slot.
    pub fn sections(&self) -> BTreeMap<Slot, String> {
        let mut s = BTreeMap::new();
        if !self.fewshot.is_empty() {
            let mut text = String::new();
            for (i, ex) in self.fewshot.iter().enumerate() {
                let _ = writeln!(text, "Example {} ({}):", i + 1, ex.name);
                let _ = writeln!(text, "Module:\n{}", self.fence(&ex.focal_snippet));
                let _ = writeln!(text, "Tests:\n{}", self.fence(&ex.test_snippet));
            }
            s.insert(Slot::Fewshot, text);
        }
        if !self.constructors.is_empty() {
            let lines: Vec<String> = self.constructors.iter().map(|c| format!("- {}: {}", c.owner, c.signature)).collect();
            s.insert(Slot::A, lines.join("\n"));
        }
        let acc = &self.accessors;
        if !acc.setters.is_empty() || !acc.getters.is_empty() {
            let mut text = String::new();
            for (title, list) in [("Setters", &acc.setters), ("Getters", &acc.getters)] {
                if list.is_empty() {
                    continue;
                }
                let _ = writeln!(text, "{title}:");
                for c in list.iter() {
                    let _ = writeln!(text, "- {}: {}", c.owner.as_deref().unwrap_or(""), c.signature());
                }
            }
            s.insert(Slot::B, text);
        }
        s.insert(Slot::D, self.focal_section());
        if !self.call_chains.is_empty() {
            let lines: Vec<String> = self.call_chains.iter().map(|c| format!("- {}", c.render())).collect();
            s.insert(Slot::E, lines.join("\n"));
        }
        if let Some(plan) = &self.mock_plan {
            let mut f = String::new();
            for field in &plan.mockable_fields {
                let _ = writeln!(f, "- field {} {}", field.declared_type.display(), field.name);
            }
            for t in &plan.mockable_types {
                let _ = writeln!(f, "- type {}", t.qualified_name);
            }
            if let Some(sk) = &self.skeleton {
                let _ = write!(f, "\n{}", self.fence(&sk.text));
            }
            s.insert(Slot::F, f);
            let stubs = |kinds: &[StubKind]| {
                let lines: Vec<String> = self
                    .skeleton
                    .iter()
                    .flat_map(|sk| &sk.stub_slots)
                    .filter(|slot| kinds.contains(&slot.kind))
                    .map(|slot| format!("- {}: {}", slot.call_site, slot.stanza))
                    .collect();
                if lines.is_empty() {
                    "(none)".to_string()
                } else {
                    lines.join("\n")
                }
            };
            s.insert(Slot::G, stubs(&[StubKind::Constructor, StubKind::Static]));
            s.insert(Slot::H, stubs(&[StubKind::Api]));
        }
        s
    }
}
