use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{OpId, Term};

const DESCRIPTOR: u8 = 0;
const CMP: u8 = 1;
const ADD: u8 = 2;
const MUL: u8 = 3;
const NEG: u8 = 4;
const POW: u8 = 5;
const FUN: u8 = 6;
const ATOM: u8 = 7;

fn prec(t: &Term) -> u8 {
    match t {
        Term::Num(n) if n.is_negative() => NEG,
        Term::Num(n) if !n.is_integer() && decimal_digits(n.denom()).is_none() => MUL,
        Term::Num(_) | Term::Var { .. } | Term::List(_) | Term::Interval(..) => ATOM,
        Term::App(op, _) => match op {
            OpId::Descriptor(_) => DESCRIPTOR,
            OpId::Eq | OpId::Lt | OpId::Le => CMP,
            OpId::Add | OpId::Sub => ADD,
            OpId::Mul | OpId::Div => MUL,
            OpId::Neg => NEG,
            OpId::Pow => POW,
            OpId::Fn(_) => FUN,
            OpId::Pred(_) => ATOM,
        },
    }
}

/// Renders a term in the concrete syntax accepted by `parse_term`, with the
/// fewest parentheses that preserve its structure.
pub fn render(t: &Term) -> String {
    let mut out = String::new();
    write_term(t, &mut out);
    out
}

fn write_wrapped(t: &Term, parens: bool, out: &mut String) {
    if parens {
        out.push('(');
        write_term(t, out);
        out.push(')');
    } else {
        write_term(t, out);
    }
}

fn write_term(t: &Term, out: &mut String) {
    match t {
        Term::Num(n) => out.push_str(&render_number(n)),
        Term::Var { name, .. } => out.push_str(name),
        Term::List(elems) => {
            out.push('[');
            for (i, e) in elems.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_term(e, out);
            }
            out.push(']');
        }
        Term::Interval(lo, hi) => {
            out.push('{');
            write_term(lo, out);
            out.push_str(" <..< ");
            write_term(hi, out);
            out.push('}');
        }
        Term::App(op, args) => write_app(op, args, out),
    }
}

fn write_app(op: &OpId, args: &[Term], out: &mut String) {
    match op {
        OpId::Descriptor(name) => {
            out.push_str(name);
            out.push(' ');
            write_wrapped(&args[0], prec(&args[0]) < ATOM, out);
        }
        OpId::Pred(p) => {
            out.push_str(p.name());
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_term(a, out);
            }
            out.push(')');
        }
        OpId::Fn(f) => {
            out.push_str(f.name());
            out.push(' ');
            write_wrapped(&args[0], prec(&args[0]) < FUN, out);
        }
        OpId::Neg => {
            out.push('-');
            let child = &args[0];
            let nested_minus = prec(child) == NEG;
            write_wrapped(child, prec(child) < NEG || nested_minus, out);
        }
        OpId::Pow => {
            write_wrapped(&args[0], prec(&args[0]) <= POW, out);
            out.push_str(" ^ ");
            write_wrapped(&args[1], prec(&args[1]) < NEG, out);
        }
        OpId::Eq | OpId::Lt | OpId::Le => {
            write_wrapped(&args[0], prec(&args[0]) <= CMP, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_wrapped(&args[1], prec(&args[1]) <= CMP, out);
        }
        OpId::Add | OpId::Sub | OpId::Mul | OpId::Div => {
            let p = if matches!(op, OpId::Add | OpId::Sub) { ADD } else { MUL };
            write_wrapped(&args[0], prec(&args[0]) < p, out);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            write_wrapped(&args[1], prec(&args[1]) <= p, out);
        }
    }
}

/// Number of decimal places needed for `1/denom`, if finite.
fn decimal_digits(denom: &BigInt) -> Option<usize> {
    let mut d = denom.clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0usize, 0usize);
    while d.is_even() && !d.is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() && !d.is_zero() {
        d /= &five;
        fives += 1;
    }
    d.is_one().then_some(twos.max(fives))
}

fn render_number(n: &BigRational) -> String {
    if n.is_integer() {
        return n.numer().to_string();
    }
    let sign = if n.is_negative() { "-" } else { "" };
    let abs = n.abs();
    match decimal_digits(abs.denom()) {
        Some(digits) => {
            let scaled =
                (abs * BigRational::from_integer(num_traits::pow(BigInt::from(10), digits))).to_integer().to_string();
            let padded = format!("{scaled:0>width$}", width = digits + 1);
            let (int, frac) = padded.split_at(padded.len() - digits);
            format!("{sign}{int}.{frac}")
        }
        None => format!("{sign}{} / {}", abs.numer(), abs.denom()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::{parse_term, TypeContext};

    fn rt(src: &str) -> String {
        render(&parse_term(src, &TypeContext::default()).unwrap())
    }

    #[test]
    fn minimal_parentheses() {
        assert_eq!(rt("A = 2 * u * v - u ^ 2"), "A = 2 * u * v - u ^ 2");
        assert_eq!(rt("((u / 2) ^ 2) + ((v / 2) ^ 2) = (r ^ 2)"), "(u / 2) ^ 2 + (v / 2) ^ 2 = r ^ 2");
        assert_eq!(rt("a - (b - c)"), "a - (b - c)");
        assert_eq!(rt("(a - b) - c"), "a - b - c");
        assert_eq!(rt("-(a + b)"), "-(a + b)");
        assert_eq!(rt("(-a) ^ 2"), "(-a) ^ 2");
        assert_eq!(rt("sin (x + 1)"), "sin (x + 1)");
        assert_eq!(rt("u / 2 = r * sin alpha"), "u / 2 = r * sin α");
    }

    #[test]
    fn items() {
        assert_eq!(rt("Extremum (A = 2*u*v - u^2)"), "Extremum (A = 2 * u * v - u ^ 2)");
        assert_eq!(rt("Constants [r = (7::real)]"), "Constants [r = 7]");
        assert_eq!(rt("Domain {0 <..< pi / 2}"), "Domain {0 <..< π / 2}");
    }

    #[test]
    fn numbers() {
        assert_eq!(render(&Term::num(7)), "7");
        assert_eq!(render(&Term::ratio(5, 2)), "2.5");
        assert_eq!(render(&Term::ratio(1, 40)), "0.025");
        assert_eq!(render(&Term::ratio(1, 3)), "1 / 3");
        assert_eq!(render(&Term::ratio(-1, 2)), "-0.5");
    }
}
