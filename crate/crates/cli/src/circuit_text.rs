//! Line-oriented circuit text format.
//!
//! ```text
//! ions 3            # first statement: number of ions
//! cnot 0 1          # control target
//! rx pi/2 2         # rx|ry|rz angle ion, exp(-i θ/2 P)
//! ms pi/2 0 1       # exp(-i θ/2 X_a X_b)
//! prep 0
//! measure 1 0       # ion bit
//! repump 2
//! barrier
//! ```
//!
//! Angles are decimal numbers or multiples of `pi` such as `-pi/2` or
//! `3pi/4`. Everything after `#` is a comment.

use std::f64::consts::PI;
use std::fmt::Write;

use ionqec_core::circuit::{Circuit, Op};
use ionqec_core::Axis;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

fn angle(s: &str) -> Option<f64> {
    if let Ok(v) = s.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let (neg, rest) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s),
    };
    let (num, den) = match rest.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().ok().filter(|d| *d != 0.0)?),
        None => (rest, 1.0),
    };
    let k = num.strip_suffix("pi")?;
    let k = if k.is_empty() { 1.0 } else { k.parse::<f64>().ok()? };
    let v = k * PI / den;
    Some(if neg { -v } else { v })
}

pub fn parse(text: &str) -> Result<Circuit, ParseError> {
    let mut circuit: Option<Circuit> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |msg: &str| ParseError {
            line,
            msg: msg.to_string(),
        };
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let words: Vec<&str> = body.split_whitespace().collect();
        let (cmd, args) = (words[0], &words[1..]);
        let ion = |s: &str| s.parse::<usize>().map_err(|_| err(&format!("bad ion index `{s}`")));
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(err(&format!("`{cmd}` takes {n} argument(s), got {}", args.len())))
            }
        };
        if cmd == "ions" {
            arity(1)?;
            if circuit.is_some() {
                return Err(err("`ions` given twice"));
            }
            let n = args[0].parse::<usize>().map_err(|_| err("bad ion count"))?;
            if n == 0 {
                return Err(err("ion count must be positive"));
            }
            circuit = Some(Circuit::new(n));
            continue;
        }
        let c = circuit.as_mut().ok_or_else(|| err("circuit must start with `ions N`"))?;
        let op = match cmd {
            "cnot" => {
                arity(2)?;
                Op::Cnot {
                    control: ion(args[0])?,
                    target: ion(args[1])?,
                }
            }
            "rx" | "ry" | "rz" => {
                arity(2)?;
                let axis = match cmd {
                    "rx" => Axis::X,
                    "ry" => Axis::Y,
                    _ => Axis::Z,
                };
                Op::Rotation {
                    axis,
                    theta: angle(args[0]).ok_or_else(|| err(&format!("bad angle `{}`", args[0])))?,
                    ion: ion(args[1])?,
                }
            }
            "ms" => {
                arity(3)?;
                Op::Ms {
                    theta: angle(args[0]).ok_or_else(|| err(&format!("bad angle `{}`", args[0])))?,
                    a: ion(args[1])?,
                    b: ion(args[2])?,
                }
            }
            "prep" => {
                arity(1)?;
                Op::Prepare0 { ion: ion(args[0])? }
            }
            "measure" => {
                arity(2)?;
                Op::MeasureZ {
                    ion: ion(args[0])?,
                    bit: args[1].parse().map_err(|_| err(&format!("bad bit index `{}`", args[1])))?,
                }
            }
            "repump" => {
                arity(1)?;
                Op::RepumpLeak { ion: ion(args[0])? }
            }
            "barrier" => {
                arity(0)?;
                Op::Barrier
            }
            _ => return Err(err(&format!("unknown operation `{cmd}`"))),
        };
        let (ions, n) = op.ions();
        if let Some(&q) = ions[..n].iter().find(|&&q| q >= c.num_ions()) {
            return Err(err(&format!("ion {q} out of range for {} ions", c.num_ions())));
        }
        if n == 2 && ions[0] == ions[1] {
            return Err(err("two-ion operation on a single ion"));
        }
        c.push(op);
    }
    circuit.ok_or(ParseError {
        line: text.lines().count().max(1),
        msg: "no `ions N` statement".into(),
    })
}

pub fn format(c: &Circuit) -> String {
    let mut out = format!("ions {}\n", c.num_ions());
    for e in c.events() {
        let _ = match e.op {
            Op::Rotation { axis, theta, ion } => {
                let name = match axis {
                    Axis::X => "rx",
                    Axis::Y => "ry",
                    Axis::Z => "rz",
                };
                writeln!(out, "{name} {theta:?} {ion}")
            }
            Op::Ms { theta, a, b } => writeln!(out, "ms {theta:?} {a} {b}"),
            Op::Prepare0 { ion } => writeln!(out, "prep {ion}"),
            Op::MeasureZ { ion, bit } => writeln!(out, "measure {ion} {bit}"),
            Op::RepumpLeak { ion } => writeln!(out, "repump {ion}"),
            Op::Barrier => writeln!(out, "barrier"),
            Op::Cnot { control, target } => writeln!(out, "cnot {control} {target}"),
        };
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn angles() {
        assert_eq!(angle("pi"), Some(PI));
        assert_eq!(angle("-pi/2"), Some(-PI / 2.0));
        assert_eq!(angle("3pi/4"), Some(3.0 * PI / 4.0));
        assert_eq!(angle("0.25"), Some(0.25));
        assert_eq!(angle("pi/0"), None);
        assert_eq!(angle("tau"), None);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse("ions 2\n# comment\n\ncnot 0 1\nms pi/2 0\n").unwrap_err();
        assert_eq!(e.line, 5);
        assert_eq!(parse("cnot 0 1\n").unwrap_err().line, 1);
        assert_eq!(parse("ions 2\ncnot 0 2\n").unwrap_err().line, 2);
        assert_eq!(parse("ions 2\nfoo\n").unwrap_err().line, 2);
    }

    fn op_strategy(n: usize) -> impl Strategy<Value = Op> {
        let q = 0..n;
        prop_oneof![
            (0u8..3, -7.0f64..7.0, q.clone()).prop_map(|(a, theta, ion)| Op::Rotation {
                axis: [Axis::X, Axis::Y, Axis::Z][a as usize],
                theta,
                ion
            }),
            (-7.0f64..7.0, q.clone(), 1..n).prop_map(move |(theta, a, d)| Op::Ms { theta, a, b: (a + d) % n }),
            (q.clone(), 1..n).prop_map(move |(c, d)| Op::Cnot { control: c, target: (c + d) % n }),
            q.clone().prop_map(|ion| Op::Prepare0 { ion }),
            (q.clone(), 0usize..8).prop_map(|(ion, bit)| Op::MeasureZ { ion, bit }),
            q.prop_map(|ion| Op::RepumpLeak { ion }),
            Just(Op::Barrier),
        ]
    }

    proptest! {
        #[test]
        fn format_then_parse_round_trips(ops in proptest::collection::vec(op_strategy(4), 0..30)) {
            let mut c = Circuit::new(4);
            for op in ops {
                c.push(op);
            }
            let back = parse(&format(&c)).unwrap();
            prop_assert_eq!(back.events(), c.events());
        }
    }
}
