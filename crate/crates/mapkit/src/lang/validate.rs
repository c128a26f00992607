use std::collections::BTreeMap;
use std::fmt;

use super::{Category, DomainStatement, Span, Theory};
use crate::logic::{Action, Agent, Interpretation, Prop};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub span: Option<Span>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.span {
            Some(s) if s != Span::default() => write!(f, "{s}: {}", self.message),
            _ => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<Diagnostic>,
    pub warnings: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// True if some interpretation satisfies both. Exhaustive over the atoms the
/// two formulas mention.
fn co_satisfiable(p: &Prop, q: &Prop) -> bool {
    let mut atoms = Default::default();
    p.atoms(&mut atoms);
    q.atoms(&mut atoms);
    let atoms: Vec<_> = atoms.into_iter().collect();
    (0..1u64 << atoms.len()).any(|bits| {
        let mut i = Interpretation(0);
        for (k, f) in atoms.iter().enumerate() {
            i.set(*f, bits >> k & 1 == 1);
        }
        p.eval(i) && q.eval(i)
    })
}

pub fn validate(theory: &Theory) -> ValidationReport {
    let sig = theory.signature();
    let mut report = ValidationReport::default();
    let mut error = |span: Span, message: String| report.errors.push(Diagnostic { span: Some(span), message });

    let mut first_exec: BTreeMap<Action, Span> = BTreeMap::new();
    let mut first_announce: BTreeMap<Action, Span> = BTreeMap::new();
    let mut first_kind: BTreeMap<Action, (Category, Span)> = BTreeMap::new();
    for st in theory.domain() {
        let a = st.node.action();
        let name = sig.action_name(a);
        match &st.node {
            DomainStatement::Executable { .. } => {
                if let Some(prev) = first_exec.insert(a, st.span) {
                    first_exec.insert(a, prev);
                    error(st.span, format!("second executability condition for `{name}` (first at {prev})"));
                }
            }
            DomainStatement::Announces { .. } => {
                if let Some(prev) = first_announce.insert(a, st.span) {
                    first_announce.insert(a, prev);
                    error(st.span, format!("`{name}` announces more than once (first at {prev})"));
                }
            }
            _ => {}
        }
        let kind = match &st.node {
            DomainStatement::Causes { .. } => Some(Category::WorldAltering),
            DomainStatement::Determines { .. } => Some(Category::Sensing),
            DomainStatement::Announces { .. } => Some(Category::Announcement),
            _ => None,
        };
        if let Some(kind) = kind {
            match first_kind.get(&a) {
                None => {
                    first_kind.insert(a, (kind, st.span));
                }
                Some((k, prev)) if *k != kind => error(
                    st.span,
                    format!("`{name}` is already a {k} action (at {prev}); it cannot also be {kind}"),
                ),
                _ => {}
            }
        }
    }

    for a in sig.actions() {
        let spec = theory.spec(a);
        let name = sig.action_name(a);
        if spec.categories().is_empty() {
            report.warnings.push(Diagnostic {
                span: None,
                message: format!("`{name}` has no causes, determines or announces statement; executing it is an error"),
            });
        }
        if spec.category() == Some(Category::WorldAltering) {
            for st in theory.domain() {
                if let DomainStatement::AwareOf { agent, action, .. } = &st.node {
                    if *action == a {
                        report.errors.push(Diagnostic {
                            span: Some(st.span),
                            message: format!(
                                "`{}` cannot partially observe world-altering action `{name}`",
                                sig.agent_name(*agent)
                            ),
                        });
                    }
                }
            }
        }
        let mut by_agent: BTreeMap<Agent, (Vec<&Prop>, Vec<&Prop>)> = BTreeMap::new();
        for (i, c) in &spec.observes {
            by_agent.entry(*i).or_default().0.push(c);
        }
        for (i, c) in &spec.aware_of {
            by_agent.entry(*i).or_default().1.push(c);
        }
        for (i, (full, partial)) in by_agent {
            if full.iter().any(|p| partial.iter().any(|q| co_satisfiable(p, q))) {
                report.warnings.push(Diagnostic {
                    span: None,
                    message: format!(
                        "`{}` may be both a full and a partial observer of `{name}`; \
                         an occurrence where both conditions hold will be rejected",
                        sig.agent_name(i)
                    ),
                });
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_theory;

    const HEADER: &str = "agents A, B\nfluents f, g\nactions a, b\n";

    fn check(body: &str) -> ValidationReport {
        validate(&parse_theory(&format!("{HEADER}{body}")).unwrap())
    }

    #[test]
    fn dual_category_is_an_error() {
        let r = check("a causes f\na determines g\nb causes g\n");
        assert_eq!(r.errors.len(), 1);
        assert!(r.errors[0].message.contains("world-altering"));
    }

    #[test]
    fn repeated_executable_is_an_error() {
        let r = check("executable a if f\nexecutable a if g\na causes f\nb causes g\n");
        assert_eq!(r.errors.len(), 1);
        assert!(r.errors[0].to_string().starts_with("5:1"));
    }

    #[test]
    fn repeated_announcement_is_an_error() {
        let r = check("a announces f\na announces g\nb causes g\n");
        assert_eq!(r.errors.len(), 1);
    }

    #[test]
    fn partial_observer_of_world_altering_is_an_error() {
        let r = check("a causes f\nb causes g\nA aware_of a\n");
        assert_eq!(r.errors.len(), 1);
    }

    #[test]
    fn uncategorized_and_overlapping_observers_warn() {
        let r = check("a determines f\nA observes a if f\nA aware_of a if f | g\n");
        assert!(r.is_ok());
        assert_eq!(r.warnings.len(), 2);
        let r = check("a determines f\nb causes f\nA observes a if f\nA aware_of a if !f\n");
        assert!(r.is_ok() && r.warnings.is_empty(), "{r:?}");
    }
}
