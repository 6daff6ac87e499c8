//! Line-oriented pass/fail records shared by the verification suites.

/// One measured-property record: an id, the measured constants, a pass flag
/// and free-form notes. Displays as a single line for diffing.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub id: String,
    pub pass: bool,
    pub measures: Vec<(String, f64)>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(id: impl Into<String>) -> Self {
        VerificationReport {
            id: id.into(),
            pass: true,
            measures: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn measure(mut self, name: impl Into<String>, value: f64) -> Self {
        self.measures.push((name.into(), value));
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn passing(mut self, pass: bool) -> Self {
        self.pass = self.pass && pass;
        self
    }

    pub fn push_measure(&mut self, name: impl Into<String>, value: f64) {
        self.measures.push((name.into(), value));
    }

    pub fn set_fail(&mut self, note: impl Into<String>) {
        self.pass = false;
        self.notes.push(note.into());
    }
}

impl std::fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.id, if self.pass { "PASS" } else { "FAIL" })?;
        for (k, v) in &self.measures {
            write!(f, " {}={:.12e}", k, v)?;
        }
        for n in &self.notes {
            write!(f, " # {n}")?;
        }
        Ok(())
    }
}
