use std::fmt::Write;

use super::{AsmInstr, AsmThread, LitmusTest, MovSource, SourceStmt, SourceThread, Threads};

/// Renders a test in its dialect's canonical text form.
pub fn render_litmus(test: &LitmusTest) -> String {
    match &test.threads {
        Threads::Source(threads) => render_source(test, threads),
        Threads::Asm(threads) => render_asm(test, threads),
    }
}

fn render_source(test: &LitmusTest, threads: &[SourceThread]) -> String {
    let mut out = format!("C {}\n\n{{", test.name);
    for (loc, v) in &test.locations {
        write!(out, " {loc} = {v};").unwrap();
    }
    out.push_str(" }\n\n");
    let params = test.locations.iter().map(|(l, _)| format!("atomic_int* {l}")).collect::<Vec<_>>().join(", ");
    for t in threads {
        writeln!(out, "P{} ({params}) {{", t.id).unwrap();
        for s in &t.statements {
            writeln!(out, "  {}", render_stmt(s)).unwrap();
        }
        out.push_str("}\n\n");
    }
    writeln!(out, "exists ({})", test.final_condition).unwrap();
    out
}

fn render_stmt(s: &SourceStmt) -> String {
    match s {
        SourceStmt::Load { dst, loc, order } => {
            format!("int {dst} = atomic_load_explicit({loc}, {});", order.c_name())
        }
        SourceStmt::Store { loc, value, order } => {
            format!("atomic_store_explicit({loc}, {value}, {});", order.c_name())
        }
        SourceStmt::Exchange { dst, loc, value, order } => {
            let call = format!("atomic_exchange_explicit({loc}, {value}, {});", order.c_name());
            match dst {
                Some(r) => format!("int {r} = {call}"),
                None => call,
            }
        }
        SourceStmt::Fence { order } => format!("atomic_thread_fence({});", order.c_name()),
    }
}

/// Assembly text of one instruction, e.g. `SWPL W2, WZR, [X1]`.
pub fn render_instr(i: &AsmInstr) -> String {
    let m = i.mnemonic().as_str();
    match i {
        AsmInstr::Mov { dst, src: MovSource::Imm(v) } => format!("{m} {dst}, #{v}"),
        AsmInstr::Mov { dst, src: MovSource::Reg(r) } => format!("{m} {dst}, {r}"),
        AsmInstr::Load { dst, addr, .. } => format!("{m} {dst}, [{}]", addr.reg),
        AsmInstr::Store { src, addr, .. } => format!("{m} {src}, [{}]", addr.reg),
        AsmInstr::Swap { src, dst, addr, .. } => format!("{m} {src}, {dst}, [{}]", addr.reg),
        AsmInstr::Dmb(d) => format!("{m} {}", d.option_name()),
    }
}

fn render_asm(test: &LitmusTest, threads: &[AsmThread]) -> String {
    let mut out = format!("AArch64 {}\n{{\n", test.name);
    if !test.locations.is_empty() {
        let decls: Vec<_> = test.locations.iter().map(|(l, v)| format!("{l} = {v};")).collect();
        writeln!(out, "  {}", decls.join(" ")).unwrap();
    }
    for t in threads.iter().filter(|t| !t.bindings.is_empty()) {
        let decls: Vec<_> = t.bindings.iter().map(|(r, l)| format!("{}:{r} = {l};", t.id)).collect();
        writeln!(out, "  {}", decls.join(" ")).unwrap();
    }
    out.push_str("}\n");

    let rows = threads.iter().map(|t| t.instructions.len()).max().unwrap_or(0);
    let columns: Vec<Vec<String>> = threads
        .iter()
        .map(|t| {
            let mut col = vec![format!("P{}", t.id)];
            col.extend(t.instructions.iter().map(render_instr));
            col.resize(rows + 1, String::new());
            col
        })
        .collect();
    let widths: Vec<usize> = columns.iter().map(|c| c.iter().map(String::len).max().unwrap_or(0)).collect();
    for row in 0..=rows {
        let cells: Vec<String> =
            columns.iter().zip(&widths).map(|(c, w)| format!(" {:<w$} ", c[row], w = *w)).collect();
        writeln!(out, "{};", cells.join("|")).unwrap();
    }
    writeln!(out, "exists ({})", test.final_condition).unwrap();
    out
}
