//! Plain-text pass/fail reports.
//!
//! Each check is one line: `[PASS]`/`[FAIL]` for asserted criteria,
//! `[info]` for reported-only measurements. The overall verdict covers
//! asserted lines only.

use crate::error::Result;
use std::fmt::Write as _;
use std::path::Path;

#[derive(Clone, Debug)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub asserted: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub title: String,
    pub lines: Vec<CheckLine>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Self { title: title.into(), lines: Vec::new() }
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.lines.push(CheckLine {
            name: name.into(),
            passed,
            asserted: true,
            detail: detail.into(),
        });
    }

    pub fn info(&mut self, name: impl Into<String>, detail: impl Into<String>) {
        self.lines.push(CheckLine {
            name: name.into(),
            passed: true,
            asserted: false,
            detail: detail.into(),
        });
    }

    pub fn merge(&mut self, other: Report) {
        self.lines.extend(other.lines);
    }

    pub fn all_passed(&self) -> bool {
        self.lines.iter().filter(|l| l.asserted).all(|l| l.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.title);
        let _ = writeln!(out, "{}", "=".repeat(self.title.len().max(4)));
        for l in &self.lines {
            let tag = if !l.asserted {
                "[info]"
            } else if l.passed {
                "[PASS]"
            } else {
                "[FAIL]"
            };
            let _ = writeln!(out, "{tag} {}: {}", l.name, l.detail);
        }
        let _ = writeln!(
            out,
            "overall: {}",
            if self.all_passed() { "PASS" } else { "FAIL" }
        );
        out
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.render())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_ignores_info_lines() {
        let mut r = Report::new("demo");
        r.check("a", true, "ok");
        r.info("b", "just a note, even alarming ones do not gate");
        assert!(r.all_passed());
        r.check("c", false, "broken");
        assert!(!r.all_passed());
        let text = r.render();
        assert!(text.contains("[PASS] a"));
        assert!(text.contains("[info] b"));
        assert!(text.contains("[FAIL] c"));
        assert!(text.contains("overall: FAIL"));
    }
}
