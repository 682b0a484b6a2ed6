//! LP-style plain-text dump, one row per line. Debugging aid only.

use core::fmt;

use super::{LinearExpression, Model, Sense, VarKind};

fn write_expr(f: &mut fmt::Formatter<'_>, model: &Model, expr: &LinearExpression) -> fmt::Result {
    let mut first = true;
    for (v, c) in expr.terms() {
        let name = &model.variable(v).name;
        if first {
            write!(f, "{c} {name}")?;
            first = false;
        } else if c < 0.0 {
            write!(f, " - {} {name}", -c)?;
        } else {
            write!(f, " + {c} {name}")?;
        }
    }
    if expr.constant_term() != 0.0 || first {
        write!(f, " + {}", expr.constant_term())?;
    }
    Ok(())
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("minimize\n  obj: ")?;
        write_expr(f, self, self.objective())?;
        f.write_str("\nsubject to\n")?;
        for c in self.constraints() {
            write!(f, "  {}: ", c.name)?;
            write_expr(f, self, &c.expr)?;
            let op = match c.sense {
                Sense::Le => "<=",
                Sense::Eq => "=",
                Sense::Ge => ">=",
            };
            writeln!(f, " {op} {}", c.rhs)?;
        }
        f.write_str("bounds\n")?;
        for v in self.variables() {
            writeln!(f, "  {} <= {} <= {}", v.lower, v.name, v.upper)?;
        }
        let ints: alloc::vec::Vec<&str> = self
            .variables()
            .iter()
            .filter(|v| v.kind != VarKind::Continuous)
            .map(|v| v.name.as_str())
            .collect();
        if !ints.is_empty() {
            f.write_str("general\n")?;
            for name in ints {
                writeln!(f, "  {name}")?;
            }
        }
        f.write_str("end\n")
    }
}
