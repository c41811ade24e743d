use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::blocks::{blocks, Block, CodegenError, EulerLoop};
use super::cpp::{self, ident, Members, Names, Params};
use super::templates::{self as tpl, fill, indent, Bindings};
use crate::discretize::{flags_of, reader_flag, writer_flag};
use crate::syntax::{BoolExpr, CommEvent, Expr, Process, Program};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TimeUnit {
    Fs,
    Ps,
    Ns,
    Us,
    #[default]
    Ms,
    Sec,
}

impl TimeUnit {
    pub const ALL: [TimeUnit; 6] = [
        TimeUnit::Fs,
        TimeUnit::Ps,
        TimeUnit::Ns,
        TimeUnit::Us,
        TimeUnit::Ms,
        TimeUnit::Sec,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TimeUnit::Fs => "SC_FS",
            TimeUnit::Ps => "SC_PS",
            TimeUnit::Ns => "SC_NS",
            TimeUnit::Us => "SC_US",
            TimeUnit::Ms => "SC_MS",
            TimeUnit::Sec => "SC_SEC",
        }
    }

    /// Units per second.
    pub fn per_sec(self) -> f64 {
        match self {
            TimeUnit::Fs => 1e15,
            TimeUnit::Ps => 1e12,
            TimeUnit::Ns => 1e9,
            TimeUnit::Us => 1e6,
            TimeUnit::Ms => 1e3,
            TimeUnit::Sec => 1.0,
        }
    }
}

impl fmt::Display for TimeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown time unit {0:?}; expected one of SC_FS, SC_PS, SC_NS, SC_US, SC_MS, SC_SEC")]
pub struct UnknownTimeUnit(pub String);

impl FromStr for TimeUnit {
    type Err = UnknownTimeUnit;

    fn from_str(s: &str) -> Result<TimeUnit, UnknownTimeUnit> {
        let key = s.trim().to_ascii_uppercase();
        let key = key.strip_prefix("SC_").unwrap_or(&key);
        TimeUnit::ALL
            .into_iter()
            .find(|u| &u.name()[3..] == key || (key == "S" && *u == TimeUnit::Sec))
            .ok_or_else(|| UnknownTimeUnit(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmitConfig {
    pub time_unit: TimeUnit,
    /// Simulated time passed to `sc_start`, in seconds.
    pub t_end: f64,
    /// Seed handed to `srand`.
    pub seed: u64,
}

impl Default for EmitConfig {
    fn default() -> EmitConfig {
        EmitConfig {
            time_unit: TimeUnit::Ms,
            t_end: 10.0,
            seed: 0,
        }
    }
}

/// Generated SystemC sources.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmitUnit {
    pub system: String,
    /// `<system>.h`: the module with one thread per component.
    pub header: String,
    pub main_cpp: String,
    pub helpers: String,
}

impl EmitUnit {
    pub fn header_name(&self) -> String {
        format!("{}.h", self.system)
    }

    /// File names and contents, in a fixed order.
    pub fn files(&self) -> Vec<(String, &str)> {
        vec![
            (self.header_name(), self.header.as_str()),
            ("main.cpp".to_string(), self.main_cpp.as_str()),
            ("helpers.h".to_string(), self.helpers.as_str()),
        ]
    }

    pub fn write_to(&self, dir: &std::path::Path) -> std::io::Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut paths = Vec::new();
        for (name, text) in self.files() {
            let path = dir.join(name);
            std::fs::write(&path, text)?;
            paths.push(path);
        }
        Ok(paths)
    }
}

struct ChoiceTable {
    id: usize,
    events: Vec<CommEvent>,
}

struct Emitter {
    unit: TimeUnit,
    next_id: usize,
    helpers: Vec<String>,
    tables: Vec<ChoiceTable>,
}

fn bind(pairs: &[(&'static str, String)]) -> Bindings {
    pairs.iter().cloned().collect()
}

fn chan_bindings(chan: &str) -> Vec<(&'static str, String)> {
    let ch = ident(chan);
    vec![
        ("ch", ch.clone()),
        ("ch_r", ident(&reader_flag(chan))),
        ("ch_w", ident(&writer_flag(chan))),
        ("ch_r_done", format!("{ch}_r_done")),
        ("ch_w_done", format!("{ch}_w_done")),
    ]
}

/// Parameters of a helper over `vars` and `delayed`: plain variables first,
/// then one `x_r` per delayed variable.
fn helper_signature(vars: BTreeSet<String>, delayed: Vec<(String, f64)>) -> (Vec<String>, Vec<String>) {
    let mut params = Vec::new();
    let mut args = Vec::new();
    for x in &vars {
        params.push(Params.var(x));
        args.push(Members.var(x));
    }
    let mut seen = BTreeSet::new();
    let mut delayed = delayed;
    delayed.sort_by(|a, b| a.0.cmp(&b.0));
    for (x, r) in delayed {
        if seen.insert(x.clone()) {
            params.push(Params.delayed(&x, r));
            args.push(Members.delayed(&x, r));
        }
    }
    (params, args)
}

fn comm_fragment(ev: &CommEvent) -> String {
    let mut b = chan_bindings(ev.chan());
    match ev {
        CommEvent::Input { var, .. } => {
            b.push(("x", ident(var)));
            fill(tpl::RECV, &bind(&b))
        }
        CommEvent::Output { expr, .. } => {
            b.push(("e", cpp::expr(expr, &Members)));
            fill(tpl::SEND, &bind(&b))
        }
    }
}

impl Emitter {
    fn new(unit: TimeUnit) -> Emitter {
        Emitter {
            unit,
            next_id: 0,
            helpers: Vec::new(),
            tables: Vec::new(),
        }
    }

    fn fresh(&mut self) -> usize {
        self.next_id += 1;
        self.next_id
    }

    fn bool_helper(&mut self, name: String, b: &BoolExpr) -> String {
        let (params, args) = helper_signature(b.vars(), b.delayed_refs());
        self.helper("bool", &name, &params, &cpp::boolean(b, &Params));
        format!("{name}({})", args.join(","))
    }

    fn num_helper(&mut self, name: String, e: &Expr) -> String {
        let (params, args) = helper_signature(e.vars(), e.delayed_refs());
        self.helper("double", &name, &params, &cpp::expr(e, &Params));
        format!("{name}({})", args.join(","))
    }

    fn helper(&mut self, ty: &str, name: &str, params: &[String], body: &str) {
        let params: Vec<String> = params.iter().map(|p| format!("double {p}")).collect();
        self.helpers.push(format!(
            "inline {ty} {name}({}) {{\n    return {body};\n}}",
            params.join(", ")
        ));
    }

    fn seq(&mut self, bs: &[Block]) -> String {
        let parts: Vec<String> = bs
            .iter()
            .map(|b| self.block(b))
            .filter(|s| !s.is_empty())
            .collect();
        parts.join("\n")
    }

    fn wait(&self, secs: f64) -> String {
        cpp::duration(secs, self.unit.per_sec())
    }

    fn block(&mut self, b: &Block) -> String {
        match b {
            Block::Skip => String::new(),
            Block::Stop => tpl::STOP.to_string(),
            Block::Assign(x, e) => fill(
                tpl::ASSIGN,
                &bind(&[("x", ident(x)), ("e", cpp::expr(e, &Members))]),
            ),
            Block::Wait(d) => fill(
                tpl::WAIT,
                &bind(&[("d", self.wait(*d)), ("tu", self.unit.name().to_string())]),
            ),
            Block::Guard(g, body) => {
                let body = self.seq(body);
                fill(tpl::GUARD, &bind(&[("b", cpp::boolean(g, &Members)), ("body", body)]))
            }
            Block::IChoice(p, q) => {
                let p = self.seq(p);
                let q = self.seq(q);
                fill(tpl::ICHOICE, &bind(&[("p", p), ("q", q)]))
            }
            Block::Repeat(body, n) => {
                let i = format!("i_{}", self.fresh());
                let mut body = self.seq(body);
                if !body.is_empty() {
                    body.push('\n');
                }
                body.push_str(&format!("{i}++;"));
                fill(tpl::REPEAT, &bind(&[("i", i), ("n", n.to_string()), ("body", body)]))
            }
            Block::Input { chan, var } => {
                let mut b = chan_bindings(chan);
                b.push(("x", ident(var)));
                fill(&tpl::input(), &bind(&b))
            }
            Block::Output { chan, expr } => {
                let mut b = chan_bindings(chan);
                b.push(("e", cpp::expr(expr, &Members)));
                fill(&tpl::output(), &bind(&b))
            }
            Block::Choice(hs) => {
                let id = self.fresh();
                let mut b = self.table_bindings(id, hs);
                let posedges: Vec<String> = (0..hs.len())
                    .map(|j| format!("IO_d_{id}[{j}].posedge_event()"))
                    .collect();
                b.push(("posedges", posedges.join("|")));
                fill(tpl::CHOICE, &bind(&b))
            }
            Block::Continuous(l) => {
                let id = self.fresh();
                let b = self.loop_bindings(id, l);
                fill(tpl::CONTINUOUS, &bind(&b))
            }
            Block::Interrupt(l, hs) => {
                let id = self.fresh();
                let mut b = self.table_bindings(id, hs);
                b.extend(self.loop_bindings(id, l));
                let waiting: Vec<String> = (0..hs.len())
                    .map(|j| format!("IO_{id}[{j}]&&!IO_d_{id}[{j}]"))
                    .collect();
                b.push(("waiting", waiting.join("&&")));
                fill(tpl::INTERRUPT, &bind(&b))
            }
        }
    }

    /// Holes shared by the choice and interrupt listings.
    fn table_bindings(&mut self, id: usize, hs: &[(CommEvent, Vec<Block>)]) -> Vec<(&'static str, String)> {
        self.tables.push(ChoiceTable {
            id,
            events: hs.iter().map(|(ev, _)| ev.clone()).collect(),
        });
        let cases: Vec<String> = hs
            .iter()
            .enumerate()
            .map(|(j, (_, q))| {
                let body = self.seq(q);
                fill(tpl::CASE, &bind(&[("j", j.to_string()), ("body", body)]))
            })
            .collect();
        vec![
            ("k", format!("k_{id}")),
            ("chan_num", format!("chan_num_{id}")),
            ("I", format!("I_{id}")),
            ("i", format!("i_{id}")),
            ("IO", format!("IO_{id}")),
            ("IO_d", format!("IO_d_{id}")),
            ("io", format!("io_{id}")),
            ("cases", cases.join("\n")),
        ]
    }

    fn loop_bindings(&mut self, id: usize, l: &EulerLoop) -> Vec<(&'static str, String)> {
        let nb = self.bool_helper(format!("N_{id}"), &l.n);
        let np = self.bool_helper(format!("N_p_{id}"), &l.np);
        let h = cpp::num(l.h);
        let mut euler = Vec::new();
        let vector = l.spec.dim() > 1;
        for (j, (x, f)) in l.spec.vars.iter().zip(&l.spec.rhs).enumerate() {
            let name = if vector { format!("f_{id}_{j}") } else { format!("f_{id}") };
            let call = self.num_helper(name, f);
            let target = if vector { format!("{x}_next") } else { x.clone() };
            let rhs = format!("{} + {h} * {call}", ident(x));
            euler.push(fill(tpl::ASSIGN, &bind(&[("x", ident(&target)), ("e", rhs)])));
        }
        if vector {
            for x in &l.spec.vars {
                let rhs = ident(&format!("{x}_next"));
                euler.push(fill(tpl::ASSIGN, &bind(&[("x", ident(x)), ("e", rhs)])));
            }
        }
        vec![
            ("i", format!("i_{id}")),
            ("n", l.steps.to_string()),
            ("nb", nb),
            ("np", np),
            ("h", self.wait(l.h)),
            ("tu", self.unit.name().to_string()),
            ("euler", euler.join("\n")),
        ]
    }
}

/// Code for one discretized sequential process, without helper definitions.
pub fn emit_stmt(p: &Process, unit: TimeUnit) -> Result<String, CodegenError> {
    let bs = blocks(p)?;
    Ok(Emitter::new(unit).seq(&bs))
}

fn delayed_vars(p: &Process) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    p.visit(&mut |q| {
        let mut refs = Vec::new();
        match q {
            Process::Assign(_, e) | Process::Output(_, e) => refs.extend(e.delayed_refs()),
            Process::Guard(b, _) => refs.extend(b.delayed_refs()),
            Process::CommChoice(hs) => {
                for (ev, _) in hs {
                    if let CommEvent::Output { expr, .. } = ev {
                        refs.extend(expr.delayed_refs());
                    }
                }
            }
            _ => {}
        }
        out.extend(refs.into_iter().map(|(x, _)| x));
    });
    out
}

const HELPER_CLASSES: &str = r#"// Variable with a time-stamped history; at(r) is the left limit of its
// value at now - r, and the initial value before time 0.
class Tracked {
public:
    Tracked() : hist_{{0.0, 0.0}} {}
    Tracked(const Tracked& o) = default;
    Tracked& operator=(double v) {
        hist_.push_back({sc_time_stamp().to_seconds(), v});
        return *this;
    }
    Tracked& operator=(const Tracked& o) { return *this = double(o); }
    operator double() const { return hist_.back().second; }
    double at(double r) const {
        const double tol = 1e-13;
        double t = sc_time_stamp().to_seconds() - r;
        double v = hist_.front().second;
        for (const auto& h : hist_) {
            bool before = t > tol ? h.first < t - tol : h.first <= tol;
            if (!before) break;
            v = h.second;
        }
        return v;
    }
private:
    std::vector<std::pair<double, double>> hist_;
};

// Boolean signal seen through a flag table entry.
class SigRef {
public:
    void bind(sc_signal<bool>& s) { sig_ = &s; }
    SigRef& operator=(bool v) { sig_->write(v); return *this; }
    operator bool() const { return sig_->read(); }
    const sc_event& posedge_event() const { return sig_->posedge_event(); }
private:
    sc_signal<bool>* sig_ = nullptr;
};
"#;

fn guard_name(system: &str, file: &str) -> String {
    format!("{}_{}", system, file)
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c.to_ascii_uppercase() } else { '_' })
        .collect()
}

/// The SystemC translation of a discretized program.
pub fn emit_module(prog: &Program, cfg: &EmitConfig) -> Result<EmitUnit, CodegenError> {
    let system = ident(&prog.name);
    let comps = prog.body.components();
    let mut em = Emitter::new(cfg.time_unit);
    let mut threads = Vec::new();
    for c in &comps {
        let body = em.seq(&blocks(&c.body)?);
        threads.push((ident(&c.name), body));
    }

    let (ins, outs) = prog.body.channel_uses();
    let channels: BTreeSet<String> = ins.union(&outs).cloned().collect();
    let flags: BTreeSet<String> = channels
        .iter()
        .flat_map(|ch| [reader_flag(ch), writer_flag(ch)])
        .collect();
    let tracked = delayed_vars(&prog.body);

    let mut members = Vec::new();
    for ch in &channels {
        let c = ident(ch);
        members.push(format!("sc_signal<double> {c};"));
        members.push(format!("sc_signal<bool> {c}_r, {c}_w;"));
        members.push(format!("sc_event {c}_r_done, {c}_w_done;"));
    }
    let vars: Vec<String> = prog
        .body
        .all_vars()
        .into_iter()
        .filter(|x| !flags.contains(x))
        .collect();
    for x in &vars {
        if tracked.contains(x) {
            members.push(format!("Tracked {};", ident(x)));
        } else {
            members.push(format!("double {} = 0.0;", ident(x)));
        }
    }

    let mut binds = Vec::new();
    let mut io_fns = Vec::new();
    for t in &em.tables {
        let n = t.events.len();
        let idx: Vec<String> = (0..n).map(|j| j.to_string()).collect();
        members.push(format!("int I_{}[{n}] = {{{}}};", t.id, idx.join(", ")));
        members.push(format!("SigRef IO_{}[{n}];", t.id));
        members.push(format!("SigRef IO_d_{}[{n}];", t.id));
        let mut cases = Vec::new();
        for (j, ev) in t.events.iter().enumerate() {
            let (mine, partner) = flags_of(ev);
            binds.push(format!("IO_{}[{j}].bind({});", t.id, ident(&mine)));
            binds.push(format!("IO_d_{}[{j}].bind({});", t.id, ident(&partner)));
            cases.push(fill(
                tpl::CASE,
                &bind(&[("j", j.to_string()), ("body", comm_fragment(ev))]),
            ));
        }
        io_fns.push(fill(
            tpl::IO_FN,
            &bind(&[
                ("io", format!("io_{}", t.id)),
                ("i", "i".to_string()),
                ("cases", cases.join("\n")),
            ]),
        ));
    }

    let mut body = Vec::new();
    body.push(members.join("\n"));
    body.extend(io_fns);
    for (name, code) in &threads {
        if code.is_empty() {
            body.push(format!("void {name}() {{\n}}"));
        } else {
            body.push(format!("void {name}() {{\n{}\n}}", indent(code, 4)));
        }
    }
    let mut ctor = binds;
    ctor.extend(threads.iter().map(|(name, _)| format!("SC_THREAD({name});")));
    body.push(format!("SC_CTOR({system}) {{\n{}\n}}", indent(&ctor.join("\n"), 4)));

    let guard = guard_name(&system, "h");
    let header = format!(
        "#ifndef {guard}\n#define {guard}\n\n#include <systemc.h>\n#include \"helpers.h\"\n\n\
         SC_MODULE({system}) {{\n{}\n}};\n\n#endif\n",
        indent(&body.join("\n\n"), 4)
    );

    let hguard = guard_name(&system, "helpers_h");
    let mut helpers = format!(
        "#ifndef {hguard}\n#define {hguard}\n\n#include <systemc.h>\n#include <cmath>\n\
         #include <utility>\n#include <vector>\n\n{HELPER_CLASSES}"
    );
    for h in &em.helpers {
        helpers.push('\n');
        helpers.push_str(h);
        helpers.push('\n');
    }
    helpers.push_str("\n#endif\n");

    let main_cpp = format!(
        "#include <cstdlib>\n#include \"{system}.h\"\n\n\
         int sc_main(int argc, char* argv[]) {{\n    srand({});\n    {system} top(\"top\");\n    \
         sc_start({}, {});\n    return 0;\n}}\n",
        cfg.seed,
        cpp::duration(cfg.t_end, cfg.time_unit.per_sec()),
        cfg.time_unit.name()
    );

    Ok(EmitUnit {
        system,
        header,
        main_cpp,
        helpers,
    })
}
