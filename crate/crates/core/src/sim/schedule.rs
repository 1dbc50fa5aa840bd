//! Line-oriented walking schedules.
//!
//! ```text
//! # comment
//! init Ls 0.6 Hs 0.1 ts 2
//! duration 12
//! at 4.5 set ts 2.5
//! stop at 10 Ls 0
//! ```
//!
//! `stop at` sets the parameters of the closing stride; the gait comes to
//! rest when that stride ends.

use crate::error::SimError;
use crate::gait::WalkParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    StepLength,
    Clearance,
    StrideTime,
}

impl Field {
    fn parse(s: &str) -> Option<Field> {
        match s {
            "Ls" => Some(Field::StepLength),
            "Hs" => Some(Field::Clearance),
            "ts" => Some(Field::StrideTime),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Field::StepLength => "Ls",
            Field::Clearance => "Hs",
            Field::StrideTime => "ts",
        }
    }

    pub fn apply(self, params: &mut WalkParams, value: f64) {
        match self {
            Field::StepLength => params.step_length = value,
            Field::Clearance => params.clearance = value,
            Field::StrideTime => params.stride_time = value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleEvent {
    pub t: f64,
    pub field: Field,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StopDirective {
    pub t: f64,
    pub overrides: Vec<(Field, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub initial: WalkParams,
    pub duration: f64,
    pub events: Vec<ScheduleEvent>,
    pub stop: Option<StopDirective>,
}

pub const EXP1: &str = "\
# 60 cm steps with 10 cm clearance: 2 s half steps, 4 s full steps
init Ls 0.6 Hs 0.1 ts 2
duration 12
at 2 set ts 4
# closing half step brings the left foot next to the right one
stop at 10 Ls 0 ts 2
";

pub const EXP2: &str = "\
init Ls 0.5 Hs 0.08 ts 1.5
duration 13
at 1.8 set Hs 0.12
at 4.5 set ts 2.5
at 6 set Ls 0.6
# left foot lands 20 cm ahead of the right one
stop at 11 Ls 0.4 ts 2.7
";

/// Built-in schedules by name.
pub fn builtin(name: &str) -> Option<Schedule> {
    let text = match name {
        "exp1" => EXP1,
        "exp2" => EXP2,
        _ => return None,
    };
    Some(parse_schedule(text).expect("built-in schedules parse"))
}

fn err(line: usize, message: impl Into<String>) -> SimError {
    SimError::Parse {
        line,
        message: message.into(),
    }
}

fn number(line: usize, tok: Option<&str>, what: &str) -> Result<f64, SimError> {
    let tok = tok.ok_or_else(|| err(line, format!("missing {what}")))?;
    let v: f64 = tok
        .parse()
        .map_err(|_| err(line, format!("{what}: `{tok}` is not a number")))?;
    if !v.is_finite() {
        return Err(err(line, format!("{what} must be finite")));
    }
    Ok(v)
}

fn field(line: usize, tok: Option<&str>) -> Result<Field, SimError> {
    let tok = tok.ok_or_else(|| err(line, "missing parameter name"))?;
    Field::parse(tok).ok_or_else(|| err(line, format!("unknown parameter `{tok}` (expected Ls, Hs or ts)")))
}

fn time(line: usize, tok: Option<&str>, last: &mut Option<f64>) -> Result<f64, SimError> {
    let t = number(line, tok, "time")?;
    if t < 0.0 {
        return Err(err(line, format!("negative time {t}")));
    }
    if let Some(prev) = *last {
        if t <= prev {
            return Err(err(line, format!("time {t} is not after the previous directive at {prev}")));
        }
    }
    *last = Some(t);
    Ok(t)
}

fn pairs<'a>(line: usize, mut toks: impl Iterator<Item = &'a str>) -> Result<Vec<(Field, f64)>, SimError> {
    let mut out: Vec<(Field, f64)> = Vec::new();
    while let Some(name) = toks.next() {
        let f = field(line, Some(name))?;
        if out.iter().any(|(g, _)| *g == f) {
            return Err(err(line, format!("{} given twice", f.name())));
        }
        out.push((f, number(line, toks.next(), f.name())?));
    }
    Ok(out)
}

fn check_signs(line: usize, params: &WalkParams) -> Result<(), SimError> {
    params
        .validate_signs()
        .map_err(|e| SimError::Feasibility(format!("line {line}: {e}")))
}

pub fn parse_schedule(text: &str) -> Result<Schedule, SimError> {
    let mut initial: Option<WalkParams> = None;
    let mut duration = None;
    let mut events = Vec::new();
    let mut stop: Option<StopDirective> = None;
    let mut last_t = None;
    let mut current = WalkParams::new(0.0, 0.0, 1.0);

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut toks = content.split_whitespace();
        let head = toks.next().unwrap_or_default();
        if head != "init" && head != "duration" && initial.is_none() {
            return Err(err(line, "`init` must come before other directives"));
        }
        if stop.is_some() && (head == "at" || head == "stop") {
            return Err(err(line, "no timed directives may follow `stop`"));
        }
        match head {
            "init" => {
                if initial.is_some() {
                    return Err(err(line, "duplicate `init`"));
                }
                let given = pairs(line, toks)?;
                let mut p = current;
                for f in [Field::StepLength, Field::Clearance, Field::StrideTime] {
                    let v = given
                        .iter()
                        .find(|(g, _)| *g == f)
                        .ok_or_else(|| err(line, format!("`init` needs {}", f.name())))?
                        .1;
                    f.apply(&mut p, v);
                }
                check_signs(line, &p)?;
                current = p;
                initial = Some(p);
            }
            "duration" => {
                if duration.is_some() {
                    return Err(err(line, "duplicate `duration`"));
                }
                let d = number(line, toks.next(), "duration")?;
                if d < 0.0 {
                    return Err(err(line, format!("negative duration {d}")));
                }
                if toks.next().is_some() {
                    return Err(err(line, "trailing tokens after duration"));
                }
                duration = Some(d);
            }
            "at" => {
                let t = time(line, toks.next(), &mut last_t)?;
                if toks.next() != Some("set") {
                    return Err(err(line, "expected `at <t> set <param> <value>`"));
                }
                let f = field(line, toks.next())?;
                let value = number(line, toks.next(), f.name())?;
                if toks.next().is_some() {
                    return Err(err(line, "trailing tokens after value"));
                }
                f.apply(&mut current, value);
                check_signs(line, &current)?;
                events.push(ScheduleEvent { t, field: f, value });
            }
            "stop" => {
                if toks.next() != Some("at") {
                    return Err(err(line, "expected `stop at <t> [param value ...]`"));
                }
                let t = time(line, toks.next(), &mut last_t)?;
                let overrides = pairs(line, toks)?;
                for &(f, v) in &overrides {
                    f.apply(&mut current, v);
                }
                check_signs(line, &current)?;
                stop = Some(StopDirective { t, overrides });
            }
            other => return Err(err(line, format!("unknown directive `{other}`"))),
        }
    }
    let initial = initial.ok_or_else(|| err(0, "missing `init` line"))?;
    let duration = duration.ok_or_else(|| err(0, "missing `duration` line"))?;
    Ok(Schedule {
        initial,
        duration,
        events,
        stop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp1_parses() {
        let s = parse_schedule(EXP1).unwrap();
        assert_eq!(s.initial, WalkParams::new(0.6, 0.1, 2.0));
        assert_eq!(s.duration, 12.0);
        assert_eq!(s.events.len(), 1);
        let stop = s.stop.unwrap();
        assert_eq!(stop.t, 10.0);
        assert_eq!(stop.overrides, vec![(Field::StepLength, 0.0), (Field::StrideTime, 2.0)]);
    }

    #[test]
    fn exp2_event_times() {
        let s = builtin("exp2").unwrap();
        let times: Vec<f64> = s.events.iter().map(|e| e.t).collect();
        assert_eq!(times, vec![1.8, 4.5, 6.0]);
        assert!(builtin("nope").is_none());
    }

    #[test]
    fn constant_run_without_events() {
        let s = parse_schedule("init Ls 0.3 Hs 0.05 ts 1\nduration 3\n").unwrap();
        assert!(s.events.is_empty() && s.stop.is_none());
    }

    #[test]
    fn negative_time_is_a_parse_error() {
        let e = parse_schedule("init Ls 0.3 Hs 0.05 ts 1\nduration 3\nat -1 set Ls 0.2\n").unwrap_err();
        assert!(matches!(e, SimError::Parse { line: 3, .. }), "{e}");
    }

    #[test]
    fn rejects_bad_input() {
        let base = "init Ls 0.3 Hs 0.05 ts 1\nduration 3\n";
        for extra in [
            "at 1 set Ls 0.2\nat 1 set Hs 0.1\n",
            "at 1 set Zs 0.2\n",
            "at 1 set Ls\n",
            "at x set Ls 0.1\n",
            "walk fast\n",
            "stop at 2\nat 2.5 set Ls 0.1\n",
        ] {
            let e = parse_schedule(&format!("{base}{extra}")).unwrap_err();
            assert!(matches!(e, SimError::Parse { .. }), "{extra}: {e}");
        }
        assert!(parse_schedule("duration 3\n").is_err());
        assert!(parse_schedule("init Ls 0.3 Hs 0.05 ts 1\n").is_err());
        assert!(parse_schedule("init Ls 0.3 Hs 0.05\nduration 1\n").is_err());
    }

    #[test]
    fn infeasible_values_are_feasibility_errors() {
        let e = parse_schedule("init Ls 0.3 Hs 0.05 ts 1\nduration 3\nat 1 set ts -2\n").unwrap_err();
        assert!(matches!(e, SimError::Feasibility(_)), "{e}");
        let e = parse_schedule("init Ls -0.3 Hs 0.05 ts 1\nduration 3\n").unwrap_err();
        assert!(matches!(e, SimError::Feasibility(_)), "{e}");
    }
}
