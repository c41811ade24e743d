//! Generators shared by the property suites.

use dhcsp_core::syntax::*;
use proptest::prelude::*;

const VARS: [&str; 5] = ["x", "y", "z", "v", "d"];
const CHANS: [&str; 3] = ["a", "b", "c"];
const ARITH: [BinOp; 5] = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow];

fn num() -> impl Strategy<Value = f64> {
    (0u32..100_000).prop_map(|k| f64::from(k) / 100.0)
}

fn name(pool: &'static [&'static str]) -> impl Strategy<Value = String> {
    prop::sample::select(pool).prop_map(str::to_string)
}

fn arith(leaf: BoxedStrategy<Expr>, depth: u32, size: u32) -> BoxedStrategy<Expr> {
    leaf.prop_recursive(depth, size, 2, |e| {
        prop_oneof![
            e.clone().prop_map(|a| Expr::Neg(Box::new(a))),
            e.clone().prop_map(|a| Expr::Sqrt(Box::new(a))),
            (prop::sample::select(&ARITH[..]), e.clone(), e)
                .prop_map(|(op, a, b)| Expr::Bin(op, Box::new(a), Box::new(b))),
        ]
    })
    .boxed()
}

/// Expressions over the variable pool, with delayed references.
pub fn expr() -> BoxedStrategy<Expr> {
    let leaf = prop_oneof![
        num().prop_map(Expr::Num),
        name(&VARS).prop_map(Expr::Var),
        (name(&VARS), prop::sample::select(&[0.1, 0.5][..])).prop_map(|(x, r)| Expr::Delayed(x, r)),
    ];
    arith(leaf.boxed(), 4, 24)
}

/// Expressions over `x` and `y` with signed literals.
pub fn point_expr() -> BoxedStrategy<Expr> {
    let leaf = prop_oneof![
        (-50i32..50).prop_map(|k| Expr::Num(f64::from(k) / 8.0)),
        (0.0f64..10.0).prop_map(Expr::Num),
        prop::sample::select(&["x", "y"][..]).prop_map(Expr::var),
    ];
    arith(leaf.boxed(), 5, 32)
}

/// A box over `x, y` and a point inside it.
pub fn box_and_point() -> impl Strategy<Value = ([(f64, f64); 2], [f64; 2])> {
    let dim = (-20.0f64..20.0, 0.0f64..5.0, 0.0f64..=1.0).prop_map(|(lo, w, t)| ((lo, lo + w), lo + t * w));
    (dim.clone(), dim).prop_map(|((bx, px), (by, py))| ([bx, by], [px, py]))
}

pub fn boolean() -> BoxedStrategy<BoolExpr> {
    const OPS: [CmpOp; 6] = [CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge, CmpOp::Eq, CmpOp::Ne];
    let leaf = prop_oneof![
        Just(BoolExpr::True),
        Just(BoolExpr::False),
        (expr(), prop::sample::select(&OPS[..]), expr()).prop_map(|(a, op, b)| BoolExpr::Cmp(a, op, b)),
    ];
    leaf.prop_recursive(3, 12, 2, |b| {
        prop_oneof![
            b.clone().prop_map(|a| BoolExpr::Not(Box::new(a))),
            (b.clone(), b.clone()).prop_map(|(a, c)| BoolExpr::and(a, c)),
            (b.clone(), b).prop_map(|(a, c)| BoolExpr::Or(Box::new(a), Box::new(c))),
        ]
    })
    .boxed()
}

fn spec() -> impl Strategy<Value = DdeSpec> {
    prop_oneof![
        (name(&VARS), expr()).prop_map(|(x, e)| DdeSpec::scalar(&x, e)),
        (expr(), expr()).prop_map(|(e, f)| DdeSpec::new(vec!["x".into(), "y".into()], vec![e, f])),
    ]
}

fn event() -> BoxedStrategy<CommEvent> {
    prop_oneof![
        (name(&CHANS), name(&VARS)).prop_map(|(chan, var)| CommEvent::Input { chan, var }),
        (name(&CHANS), expr()).prop_map(|(chan, expr)| CommEvent::Output { chan, expr }),
    ]
    .boxed()
}

/// Arbitrary processes, including every construct of the language but `||`.
pub fn process() -> BoxedStrategy<Process> {
    let leaf = prop_oneof![
        Just(Process::Skip),
        Just(Process::Stop),
        (name(&VARS), expr()).prop_map(|(x, e)| Process::Assign(x, e)),
        num().prop_map(Process::Wait),
        (name(&CHANS), name(&VARS)).prop_map(|(c, x)| Process::Input(c, x)),
        (name(&CHANS), expr()).prop_map(|(c, e)| Process::Output(c, e)),
        (spec(), boolean()).prop_map(|(s, b)| Process::Dde(s, b)),
    ];
    leaf.prop_recursive(6, 32, 3, |p| {
        let handlers = prop::collection::vec((event(), p.clone()), 1..3).boxed();
        prop_oneof![
            (p.clone(), p.clone()).prop_map(|(a, b)| Process::seq(a, b)),
            (boolean(), p.clone()).prop_map(|(g, q)| Process::guard(g, q)),
            (p.clone(), p.clone()).prop_map(|(a, b)| Process::ichoice(a, b)),
            (p.clone(), 1u64..20).prop_map(|(q, n)| Process::repeat(q, n)),
            handlers.clone().prop_map(Process::CommChoice),
            (spec(), boolean(), handlers).prop_map(|(s, b, hs)| Process::DdeInterrupt(s, b, hs)),
        ]
    })
    .boxed()
}

pub fn program() -> impl Strategy<Value = Program> {
    prop::collection::vec(process(), 1..4).prop_map(|bodies| Program {
        name: "Gen".into(),
        body: Process::Parallel(
            bodies
                .into_iter()
                .enumerate()
                .map(|(i, body)| Component {
                    name: format!("P{i}"),
                    body,
                })
                .collect(),
        ),
    })
}

/// Time step of the generated discrete systems.
pub const GRID: f64 = 0.1;

fn val() -> impl Strategy<Value = f64> {
    (-20i32..20).prop_map(|k| f64::from(k) / 4.0)
}

/// Straight-line code over `own` with waits on the grid, guards and choices.
fn discrete_body(own: &'static str) -> BoxedStrategy<Process> {
    let leaf = prop_oneof![
        Just(Process::Skip),
        val().prop_map(move |c| Process::assign(own, Expr::Num(c))),
        val().prop_map(move |c| Process::assign(own, Expr::add(Expr::var(own), Expr::Num(c)))),
        (1u32..4).prop_map(|k| Process::Wait(f64::from(k) * GRID)),
    ];
    leaf.prop_recursive(3, 12, 2, move |p| {
        prop_oneof![
            (p.clone(), p.clone()).prop_map(|(a, b)| Process::seq(a, b)),
            (p.clone(), p.clone()).prop_map(|(a, b)| Process::ichoice(a, b)),
            (val(), p.clone()).prop_map(move |(c, q)| {
                Process::guard(BoolExpr::Cmp(Expr::var(own), CmpOp::Ge, Expr::Num(c)), q)
            }),
            (p, 1u64..3).prop_map(|(q, n)| Process::repeat(q, n)),
        ]
    })
    .boxed()
}

/// A sender and a receiver over discrete time that meet once on channel `c`.
pub fn discrete_system() -> impl Strategy<Value = Process> {
    (discrete_body("x"), discrete_body("x"), discrete_body("y")).prop_map(|(a1, a2, b)| {
        let send = Process::Output("c".into(), Expr::var("x"));
        Process::Parallel(vec![
            Component {
                name: "A".into(),
                body: Process::seq(Process::seq(a1, send), a2),
            },
            Component {
                name: "B".into(),
                body: Process::seq(Process::Input("c".into(), "y".into()), b),
            },
        ])
    })
}

/// Parameters `(a, b, x0, eps)` of `x' = a·x + b·x@0.1` validated on `[0, 1]`.
pub fn linear_dde_case() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (
        -1.5f64..0.5,
        -1.0f64..1.0,
        -3.0f64..3.0,
        prop::sample::select(&[0.1, 0.2, 0.4][..]),
    )
}
