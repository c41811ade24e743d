//! Code templates shared by the emitter and the reinterpreter. A `$name`
//! token is a hole; the emitter fills it, the reinterpreter binds it.

use std::collections::BTreeMap;

pub const ASSIGN: &str = "$x = $e; wait(SC_ZERO_TIME);";

pub const WAIT: &str = "wait($d, $tu);";

pub const GUARD: &str = "\
if ($b) {
    $body
}";

pub const ICHOICE: &str = "\
if (rand()%2) {
    $p
}
else {
    $q
}";

/// The body hole also holds the trailing `$i++;`.
pub const REPEAT: &str = "\
int $i=1;
while ($i<=$n) {
    $body
}";

pub const STOP: &str = "return;";

pub const RECV: &str = "\
wait($ch_w_done);
$x=$ch.read();
wait(SC_ZERO_TIME);
$ch_r_done.notify();";

pub const SEND: &str = "\
$ch.write($e);
wait(SC_ZERO_TIME);
$ch_w_done.notify();
wait($ch_r_done);";

pub const INPUT: &str = "\
// code for input statement
$ch_r=1;
wait(SC_ZERO_TIME);
if(!$ch_w)
    wait($ch_w.posedge_event());
$recv
$ch_r=0;
wait(SC_ZERO_TIME);";

pub const OUTPUT: &str = "\
// code for output statement
$ch_w=1;
wait(SC_ZERO_TIME);
if(!$ch_r)
    wait($ch_r.posedge_event());
$send
$ch_w=0;
wait(SC_ZERO_TIME);";

pub const CONTINUOUS: &str = "\
// code for delayed continuous statement
for(int $i=0;$i<$n;$i++){
    if($nb&&$np){
        wait($h,$tu);
        $euler
    }
}
if($nb&&$np){
    return;
}";

pub const CHOICE: &str = "\
// code for communication choice statement
int $k=-1;
int $chan_num=sizeof($I)/sizeof($I[0]);
for(int $i=0;$i<$chan_num;$i++){
    $IO[$i]=1;
}
wait(SC_ZERO_TIME);
wait($posedges);
for(int $i=0;$i<$chan_num;$i++){
    if($IO[$i]==1&&$IO_d[$i]==1){
        $io($i);
        $k=$i;
        break;
    }
}
for(int $i=0;$i<$chan_num;$i++){
    $IO[$i]=0;
}
wait(SC_ZERO_TIME);
switch($k){
$cases
};";

pub const INTERRUPT: &str = "\
// code for communication interrupt statement
int $k=-1;
int $chan_num=sizeof($I)/sizeof($I[0]);
for(int $i=0;$i<$chan_num;$i++){
    $IO[$i]=1;
}
wait(SC_ZERO_TIME);
for(int $i=0;$i<$n;$i++){
    if($nb&&$np&&$waiting){
        wait($h,$tu);
        $euler
    }
}
if(!($nb&&$np)&&$waiting){
    for(int $i=0;$i<$chan_num;$i++){
        $IO[$i]=0;
    }
    wait(SC_ZERO_TIME);
}
for(int $i=0;$i<$chan_num;$i++){
    if($IO[$i]==1&&$IO_d[$i]==1){
        $io($i);
        $k=$i;
        break;
    }
}
for(int $i=0;$i<$chan_num;$i++){
    $IO[$i]=0;
}
wait(SC_ZERO_TIME);
if($k>-1){
    switch($k){
    $cases
    };
}
if($nb&&$np&&$waiting){
    return;
}";

pub const CASE: &str = "\
case $j: {
    $body
} break;";

/// Member function performing handler `$i` of one choice.
pub const IO_FN: &str = "\
void $io(int $i) {
    switch($i){
    $cases
    }
}";

/// The input listing with its communication part spliced in.
pub fn input() -> String {
    INPUT.replace("$recv", RECV)
}

pub fn output() -> String {
    OUTPUT.replace("$send", SEND)
}

pub type Bindings = BTreeMap<&'static str, String>;

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Substitutes every hole. A hole alone on its line takes a multi-line value,
/// indented like the hole; an empty value drops the line.
pub fn fill(template: &str, b: &Bindings) -> String {
    let mut out: Vec<String> = Vec::new();
    for line in template.lines() {
        let trimmed = line.trim_start();
        let indent = &line[..line.len() - trimmed.len()];
        if let Some(name) = trimmed.strip_prefix('$') {
            if name.chars().all(is_ident_char) {
                let value = lookup(b, name);
                out.extend(value.lines().map(|l| {
                    if l.is_empty() {
                        String::new()
                    } else {
                        format!("{indent}{l}")
                    }
                }));
                continue;
            }
        }
        out.push(substitute_line(line, b));
    }
    out.join("\n")
}

fn lookup<'a>(b: &'a Bindings, name: &str) -> &'a str {
    b.get(name)
        .unwrap_or_else(|| panic!("template hole ${name} left unbound"))
}

fn substitute_line(line: &str, b: &Bindings) -> String {
    let mut out = String::new();
    let mut chars = line.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c != '$' {
            out.push(c);
            continue;
        }
        let mut end = i + 1;
        while let Some(&(j, d)) = chars.peek() {
            if !is_ident_char(d) {
                break;
            }
            end = j + d.len_utf8();
            chars.next();
        }
        out.push_str(lookup(b, &line[i + 1..end]));
    }
    out
}

/// Indents every non-empty line of `text` by `n` spaces.
pub fn indent(text: &str, n: usize) -> String {
    let pad = " ".repeat(n);
    text.lines()
        .map(|l| if l.is_empty() { String::new() } else { format!("{pad}{l}") })
        .collect::<Vec<_>>()
        .join("\n")
}

/// C++ tokens; `//` comments are kept as single tokens, preprocessor lines dropped.
pub fn tokenize(src: &str) -> Vec<String> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    let mut line_start = true;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line_start = true;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c == '#' && line_start {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        line_start = false;
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            toks.push(text.trim_end().to_string());
            continue;
        }
        if c == '"' {
            i += 1;
            while i < chars.len() && chars[i] != '"' {
                i += 1;
            }
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' || c == '$' {
            i += 1;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
        } else {
            const TWO: &[&str] = &["&&", "||", "<=", ">=", "==", "!=", "++", "--", "::", "->"];
            let pair: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            i += if TWO.contains(&pair.as_str()) { 2 } else { 1 };
        }
        toks.push(chars[start..i.min(chars.len())].iter().collect());
    }
    toks
}

/// Token bindings of a successful match.
pub type Captures = BTreeMap<String, Vec<String>>;

fn depth_delta(t: &str) -> i32 {
    match t {
        "(" | "[" | "{" => 1,
        ")" | "]" | "}" => -1,
        _ => 0,
    }
}

/// Matches `template` against `toks` from `pos`. Each hole takes the shortest
/// bracket-balanced run that ends before the next literal; a repeated hole must
/// bind the same tokens. Returns the captures and the position after the match.
pub fn match_at(template: &str, toks: &[String], pos: usize) -> Option<(Captures, usize)> {
    let pat = tokenize(template);
    let mut caps = Captures::new();
    let mut at = pos;
    for (k, p) in pat.iter().enumerate() {
        if let Some(name) = p.strip_prefix('$') {
            let next = pat.get(k + 1)?;
            debug_assert!(!next.starts_with('$'), "adjacent holes in template");
            let mut depth = 0;
            let mut end = at;
            loop {
                let t = toks.get(end)?;
                if depth == 0 && t == next {
                    break;
                }
                depth += depth_delta(t);
                if depth < 0 {
                    return None;
                }
                end += 1;
            }
            let value = toks[at..end].to_vec();
            if let Some(prev) = caps.get(name) {
                if *prev != value {
                    return None;
                }
            }
            caps.insert(name.to_string(), value);
            at = end;
        } else {
            if toks.get(at)? != p {
                return None;
            }
            at += 1;
        }
    }
    Some((caps, at))
}
