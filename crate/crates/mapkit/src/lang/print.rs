//! Canonical source rendering. `parse_theory(&t.to_string())` reproduces `t`
//! up to spans.

use std::fmt;

use super::{DomainStatement, InitialStatement, Theory};
use crate::logic::{Formula, Prop, Signature};

fn write_if(f: &mut fmt::Formatter<'_>, cond: &Formula, sig: &Signature) -> fmt::Result {
    if cond.is_top() {
        Ok(())
    } else {
        write!(f, " if {}", cond.display(sig))
    }
}

fn write_if_prop(f: &mut fmt::Formatter<'_>, cond: &Prop, sig: &Signature) -> fmt::Result {
    if *cond == Prop::True {
        Ok(())
    } else {
        write!(f, " if {}", cond.display(sig))
    }
}

impl DomainStatement {
    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        crate::logic::DisplayFn(move |f: &mut fmt::Formatter<'_>| {
            let name = sig.action_name(self.action());
            match self {
                DomainStatement::Executable { condition, .. } => {
                    write!(f, "executable {name}")?;
                    write_if(f, condition, sig)
                }
                DomainStatement::Causes { effect, condition, .. } => {
                    write!(f, "{name} causes {}", effect.display(sig))?;
                    write_if(f, condition, sig)
                }
                DomainStatement::Determines { fluent, .. } => {
                    write!(f, "{name} determines {}", sig.fluent_name(*fluent))
                }
                DomainStatement::Announces { payload, .. } => {
                    write!(f, "{name} announces {}", payload.display(sig))
                }
                DomainStatement::Observes { agent, condition, .. } => {
                    write!(f, "{} observes {name}", sig.agent_name(*agent))?;
                    write_if_prop(f, condition, sig)
                }
                DomainStatement::AwareOf { agent, condition, .. } => {
                    write!(f, "{} aware_of {name}", sig.agent_name(*agent))?;
                    write_if_prop(f, condition, sig)
                }
            }
        })
    }
}

impl InitialStatement {
    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        crate::logic::DisplayFn(move |f: &mut fmt::Formatter<'_>| {
            write!(f, "initially {}", self.to_formula().display(sig))
        })
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sig = self.signature();
        let list = |names: Vec<&str>| names.join(", ");
        writeln!(f, "agents {}", list(sig.agents().map(|a| sig.agent_name(a)).collect()))?;
        writeln!(f, "fluents {}", list(sig.fluents().map(|x| sig.fluent_name(x)).collect()))?;
        writeln!(f, "actions {}", list(sig.actions().map(|a| sig.action_name(a)).collect()))?;
        if !self.domain().is_empty() {
            writeln!(f)?;
        }
        for st in self.domain() {
            writeln!(f, "{}", st.node.display(sig))?;
        }
        if !self.initial().is_empty() {
            writeln!(f)?;
        }
        for st in self.initial() {
            writeln!(f, "{}", st.node.display(sig))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use crate::lang::parse_theory;

    fn strip(t: &crate::lang::Theory) -> (Vec<String>, Vec<String>) {
        let sig = t.signature();
        (
            t.domain().iter().map(|s| s.node.display(sig).to_string()).collect(),
            t.initial().iter().map(|s| s.node.display(sig).to_string()).collect(),
        )
    }

    #[test]
    fn round_trip_preserves_ast() {
        let src = "agents A, B\nfluents f, g\nactions a, b\n\
                   executable a if B[A] (f | g), !g\n\
                   a causes f, !g if C[{A, B}] g\n\
                   b announces f -> g\n\
                   B observes a if f\n\
                   initially C (B[B] f | B[B] !f)\n\
                   initially E B[A] f & C !g\n";
        let t1 = parse_theory(src).unwrap();
        let printed = t1.to_string();
        let t2 = parse_theory(&printed).unwrap();
        assert_eq!(strip(&t1), strip(&t2));
        assert_eq!(t1.signature(), t2.signature());
        for (a, b) in t1.domain().iter().zip(t2.domain()) {
            assert_eq!(a.node, b.node);
        }
        for (a, b) in t1.initial().iter().zip(t2.initial()) {
            assert_eq!(a.node, b.node);
        }
        assert!(printed.contains("executable a if B[A] (f | g) & !g"), "{printed}");
    }
}
