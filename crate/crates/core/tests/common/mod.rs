#![allow(dead_code)]

pub mod corpus;
pub mod gen;
pub mod props;
pub mod recheck;

use dhcsp_core::codegen::templates::tokenize;
use dhcsp_core::codegen::{emit_stmt, TimeUnit};
use dhcsp_core::discretize::discretize;
use dhcsp_core::syntax::{parse, parse_program, Program};

pub const WATERTANK: &str = include_str!("../../../../models/watertank.dhcsp");

pub fn watertank() -> Program {
    parse_program(WATERTANK).unwrap()
}

/// The water tank with its initial level replaced.
pub fn watertank_with_level(d0: f64) -> Program {
    parse_program(&WATERTANK.replace("d := 4.5", &format!("d := {d0}"))).unwrap()
}

/// Step size used for the template fragments.
pub const FRAGMENT_H: f64 = 0.025;

/// `(name, source statement, reference listing)` for the five communication and
/// continuous fragments.
pub const FRAGMENTS: [(&str, &str, &str); 5] = [
    ("input", "ch?x", include_str!("../golden/listings/input.cpp")),
    ("output", "ch!e", include_str!("../golden/listings/output.cpp")),
    (
        "continuous",
        "<x' = -x + x@0.1 & x < 1>",
        include_str!("../golden/listings/continuous.cpp"),
    ),
    (
        "choice",
        "select [a?x -> (y := 1), b!y -> (x := 2)]",
        include_str!("../golden/listings/choice.cpp"),
    ),
    (
        "interrupt",
        "<x' = -x & x < 1> |> [a?x -> (y := 1), b!y -> (x := 2)]",
        include_str!("../golden/listings/interrupt.cpp"),
    ),
];

pub fn emitted_fragment(src: &str) -> String {
    let q = discretize(&parse(src).unwrap(), FRAGMENT_H, 0.2, 1.0).unwrap();
    emit_stmt(&q, TimeUnit::Sec).unwrap()
}

fn toks(s: &str) -> Vec<String> {
    tokenize(s)
}

/// End of the bracket-balanced run starting with the opener at `i`.
fn closing(t: &[String], i: usize) -> usize {
    let mut depth = 0;
    for (j, tok) in t.iter().enumerate().skip(i) {
        match tok.as_str() {
            "(" | "[" | "{" => depth += 1,
            ")" | "]" | "}" => {
                depth -= 1;
                if depth == 0 {
                    return j;
                }
            }
            _ => {}
        }
    }
    panic!("unbalanced tokens");
}

fn strip_id(tok: &str) -> Option<&'static str> {
    const BASES: [&str; 10] = ["chan_num", "IO_d", "N_p", "IO", "io", "N", "I", "i", "k", "f"];
    BASES.into_iter().find(|b| {
        tok.strip_prefix(b)
            .and_then(|rest| rest.strip_prefix('_'))
            .is_some_and(|n| !n.is_empty() && n.chars().all(|c| c.is_ascii_digit()))
    })
}

fn is_posedge(t: &[String], i: usize) -> bool {
    t.len() >= i + 8 && t[i] == "IO_d" && t[i + 1] == "[" && t[i + 4] == "." && t[i + 5] == "posedge_event"
}

fn is_waiting_pair(t: &[String], i: usize) -> bool {
    t.len() >= i + 11
        && t[i] == "&&"
        && t[i + 1] == "IO"
        && t[i + 5] == "&&"
        && t[i + 6] == "!"
        && t[i + 7] == "IO_d"
}

/// Maps generated code onto the placeholder vocabulary of the reference listings.
///
/// * numbered statement-local names (`i_3`, `IO_d_3`, `N_p_3`, ...) lose their number;
/// * helper calls become `N(B,e)`, `N_p(B,e)` and `f(x,x_r)`;
/// * the handler call `io(i)` becomes `io_i` and the `switch` on `k` becomes `SC(Q[k])`;
/// * the step literal and unit become `h` and `SC_TU`, the repetition count `T/h`;
/// * the expanded posedge disjunction and readiness conjunction are elided as `...`.
pub fn to_listing_vocabulary(src: &str, h: f64) -> Vec<String> {
    let t: Vec<String> = toks(src)
        .into_iter()
        .map(|tok| strip_id(&tok).map_or(tok, str::to_string))
        .collect();
    let h_lit = h.to_string();
    let mut out: Vec<String> = Vec::new();
    let mut i = 0;
    while i < t.len() {
        let tok = t[i].as_str();
        let next = t.get(i + 1).map(String::as_str);
        match (tok, next) {
            ("N" | "N_p", Some("(")) => {
                out.extend(toks(&format!("{tok}(B,e)")));
                i = closing(&t, i + 1) + 1;
            }
            ("f", Some("(")) => {
                out.extend(toks("f(x,x_r)"));
                i = closing(&t, i + 1) + 1;
            }
            ("io", Some("(")) => {
                out.push("io_i".into());
                i = closing(&t, i + 1) + 1;
            }
            ("switch", Some("(")) => {
                let body = closing(&t, i + 1) + 1;
                out.extend(toks("SC(Q[k])"));
                i = closing(&t, body) + 1;
            }
            ("SC_SEC", _) => {
                out.push("SC_TU".into());
                i += 1;
            }
            ("<", _) if out.last().map(String::as_str) == Some("i")
                && next.is_some_and(|n| n.parse::<f64>().is_ok()) =>
            {
                out.extend(toks("<T/h"));
                i += 2;
            }
            _ if tok == h_lit => {
                out.push("h".into());
                i += 1;
            }
            _ if is_posedge(&t, i) => {
                let mut j = i;
                while is_posedge(&t, j) && t.get(j + 8).map(String::as_str) == Some("|") {
                    j += 9;
                }
                out.extend(t[i..i + 8].iter().cloned());
                if j > i {
                    out.extend(toks("|...|IO_d[chan_num-1].posedge_event()"));
                }
                i = j + 8;
            }
            _ if is_waiting_pair(&t, i) => {
                out.extend(t[i..i + 11].iter().cloned());
                let mut j = i + 11;
                while is_waiting_pair(&t, j) {
                    j += 11;
                }
                if j > i + 11 {
                    out.extend(toks("&&..."));
                }
                i = j;
            }
            _ => {
                out.push(t[i].clone());
                i += 1;
            }
        }
    }
    out
}

pub fn listing_tokens(listing: &str) -> Vec<String> {
    toks(listing)
}

/// Every fragment agrees with its listing; the first disagreement otherwise.
pub fn fragments_match() -> Result<(), String> {
    for (name, src, listing) in FRAGMENTS {
        let got = to_listing_vocabulary(&emitted_fragment(src), FRAGMENT_H);
        let want = listing_tokens(listing);
        if got != want {
            let at = got.iter().zip(&want).position(|(a, b)| a != b).unwrap_or(got.len().min(want.len()));
            return Err(format!(
                "{name}: token {at}: got {:?}, want {:?}",
                &got[at.saturating_sub(3)..(at + 4).min(got.len())],
                &want[at.saturating_sub(3)..(at + 4).min(want.len())]
            ));
        }
    }
    Ok(())
}
