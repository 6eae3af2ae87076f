use std::path::Path;

use rach_core::model::ModelError;
use rach_core::{AllocationPlan, Scenario};

use crate::error::CliError;

/// Reads and validates a scenario file. Validation issues that name a class are
/// reported against the line holding that class's `id`.
pub fn load_scenario(path: &Path) -> Result<(Scenario, String), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    match Scenario::parse_toml(&text) {
        Ok(s) => Ok((s, text)),
        Err(ModelError::Validation(v)) => {
            let lines: Vec<String> = v
                .issues
                .iter()
                .map(|issue| match issue.class_id.and_then(|id| class_line(&text, id)) {
                    Some(line) => format!("{}:{line}: {issue}", path.display()),
                    None => format!("{}: {issue}", path.display()),
                })
                .collect();
            Err(CliError::Validation(format!("invalid scenario\n{}", lines.join("\n"))))
        }
        Err(e) => Err(CliError::Validation(format!("{}: {e}", path.display()))),
    }
}

fn class_line(text: &str, id: u32) -> Option<usize> {
    text.lines().position(|line| {
        let line = line.split('#').next().unwrap_or("");
        let mut kv = line.splitn(2, '=');
        matches!(
            (kv.next().map(str::trim), kv.next().map(str::trim)),
            (Some("id"), Some(v)) if v.parse::<u32>() == Ok(id)
        )
    })
    .map(|i| i + 1)
}

/// Parses `--plan`: either `id=count` pairs or bare counts in file order.
pub fn parse_plan(spec: &str, scenario: &Scenario) -> Result<AllocationPlan, CliError> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
    let bad = |p: &str| CliError::Validation(format!("bad --plan entry `{p}`"));
    let plan = if parts.iter().all(|p| p.contains('=')) {
        let mut pairs = Vec::with_capacity(parts.len());
        for p in &parts {
            let (id, count) = p.split_once('=').ok_or_else(|| bad(p))?;
            pairs.push((id.trim().parse().map_err(|_| bad(p))?, count.trim().parse().map_err(|_| bad(p))?));
        }
        AllocationPlan::from_pairs(pairs)
    } else {
        if parts.len() != scenario.len() {
            return Err(CliError::Validation(format!(
                "--plan lists {} counts for {} classes",
                parts.len(),
                scenario.len()
            )));
        }
        let counts = parts.iter().map(|p| p.parse::<u64>().map_err(|_| bad(p))).collect::<Result<Vec<_>, _>>()?;
        AllocationPlan::from_pairs(scenario.file_order().iter().copied().zip(counts))
    };
    plan.check(scenario)?;
    Ok(plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TEXT: &str = "total_raos = 10\nstrategy = \"full_dedication\"\n\n[[classes]]\nid = 2\nra_density = 1.0\nbackoff_s = 1.0\n\n[[classes]]\nid = 1 # first\nra_density = 2.0\nbackoff_s = 1.0\n";

    #[test]
    fn finds_class_lines() {
        assert_eq!(class_line(TEXT, 2), Some(5));
        assert_eq!(class_line(TEXT, 1), Some(10));
        assert_eq!(class_line(TEXT, 3), None);
    }

    #[test]
    fn plan_forms() {
        let s = Scenario::parse_toml(TEXT).unwrap();
        assert_eq!(parse_plan("4,6", &s).unwrap(), AllocationPlan::from_pairs([(2, 4), (1, 6)]));
        assert_eq!(parse_plan("1=6, 2=4", &s).unwrap(), AllocationPlan::from_pairs([(2, 4), (1, 6)]));
        assert!(parse_plan("4", &s).is_err());
        assert!(parse_plan("5,6", &s).is_err());
        assert!(parse_plan("x,6", &s).is_err());
    }
}
