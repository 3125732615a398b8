use std::fmt::Write;

use crate::syntax::Program;

/// Renders a program in the concrete syntax accepted by [`super::parse_program`].
pub fn pretty_print(p: &Program) -> String {
    let mut out = String::new();
    write_stmt(&mut out, p, 0);
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn write_stmt(out: &mut String, p: &Program, depth: usize) {
    match p {
        Program::Skip => out.push_str("skip"),
        Program::Assign(x, e) => {
            let _ = write!(out, "{x} := {e}");
        }
        Program::Seq(ps) => {
            for (i, s) in ps.iter().enumerate() {
                if i > 0 {
                    out.push_str(";\n");
                    indent(out, depth);
                }
                write_stmt(out, s, depth);
            }
        }
        Program::If(g, a, b) => {
            let _ = write!(out, "if ({g}) ");
            write_block(out, a, depth);
            out.push_str(" else ");
            write_block(out, b, depth);
        }
        Program::PChoice(a, prob, b) => {
            write_block(out, a, depth);
            let _ = write!(out, " [{prob}] ");
            write_block(out, b, depth);
        }
        Program::DChoice(a, b) => {
            write_block(out, a, depth);
            out.push_str(" [] ");
            write_block(out, b, depth);
        }
        Program::While(g, body) => {
            let _ = write!(out, "while ({g}) ");
            write_block(out, body, depth);
        }
    }
}

fn is_simple(p: &Program) -> bool {
    matches!(p, Program::Skip | Program::Assign(..))
}

fn write_block(out: &mut String, p: &Program, depth: usize) {
    if is_simple(p) {
        out.push_str("{ ");
        write_stmt(out, p, depth);
        out.push_str(" }");
        return;
    }
    out.push_str("{\n");
    indent(out, depth + 1);
    write_stmt(out, p, depth + 1);
    out.push('\n');
    indent(out, depth);
    out.push('}');
}
