//! One conversation: phase scheduling, answer interpretation, tree descent,
//! termination and the feedback trigger.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cluster::{propagate_feedback, ClusterId, FeedbackConfig};
use crate::gateway::ProviderError;
use crate::planner::{plan_question, SearchConfig};
use crate::tree::{AnswerId, Branch, QuestionId, QuestionTree};
use crate::types::{casefold, Catalog, CatalogError, OutcomeId, PossibilitySet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    TwentyQuestions,
    Medical,
    Troubleshooting,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::TwentyQuestions => "twenty_questions",
            Domain::Medical => "medical",
            Domain::Troubleshooting => "troubleshooting",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "twenty_questions" | "20q" => Some(Domain::TwentyQuestions),
            "medical" => Some(Domain::Medical),
            "troubleshooting" => Some(Domain::Troubleshooting),
            _ => None,
        }
    }

    pub fn targeting_question(self, label: &str) -> String {
        match self {
            Domain::TwentyQuestions => format!("Is X '{label}'?"),
            Domain::Medical | Domain::Troubleshooting => format!("Are you experiencing '{label}'?"),
        }
    }

    /// What a truthful answerer says when the target is named.
    pub fn confirmation(self, label: &str) -> String {
        match self {
            Domain::TwentyQuestions => format!("You guessed it. X is '{label}'."),
            Domain::Medical => format!("You are right. I am experiencing '{label}'."),
            Domain::Troubleshooting => format!("You are right. My device has issues with '{label}'."),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Closed,
    Open,
    Constrained,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Closed => "closed",
            Mode::Open => "open",
            Mode::Constrained => "constrained",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "closed" => Some(Mode::Closed),
            "open" => Some(Mode::Open),
            "constrained" => Some(Mode::Constrained),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    InformationSeeking,
    Targeting,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::InformationSeeking => "information_seeking",
            Phase::Targeting => "targeting",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Active,
    Success { label: String, turns: u32 },
    Failure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnswerInterpretation {
    Affirm,
    Negate,
    TargetConfirmed(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exchange {
    pub question: String,
    pub answer: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptRecord {
    pub turn: u32,
    pub phase: Phase,
    pub question: String,
    pub answer: String,
    pub set_size_after: usize,
}

/// What the session wants next.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Ask { turn: u32, phase: Phase, question: String },
    Finished(Status),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("session is no longer active")]
    SessionClosed,
    #[error("answer could not be interpreted: {0}")]
    UninterpretableAnswer(String),
    #[error("no question is awaiting an answer")]
    NoPendingQuestion,
    #[error("invalid session parameters: {0}")]
    InvalidParams(&'static str),
    #[error("initial possibility set is empty")]
    EmptySet,
    #[error("provider: {0}")]
    Provider(#[from] ProviderError),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

/// Maps a free-text answer to yes/no when no pattern applies.
pub trait AnswerClassifier: Send + Sync {
    fn classify(&self, question: &str, answer: &str) -> Result<Option<Branch>, ProviderError>;
}

/// Proposes a fresh possibility set for open-set conversations.
pub trait SetRenewer: Send + Sync {
    fn renew(&self, history: &[Exchange], existing: &[String], size: usize) -> Result<Vec<String>, ProviderError>;
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionParams {
    /// T
    pub max_turns: u32,
    /// δ
    pub delta: f64,
    pub search: SearchConfig,
    pub feedback: FeedbackConfig,
    pub mode: Mode,
    pub domain: Domain,
    pub open_set_size: usize,
}

impl Default for SessionParams {
    fn default() -> Self {
        Self {
            max_turns: 20,
            delta: 0.6,
            search: SearchConfig::default(),
            feedback: FeedbackConfig::default(),
            mode: Mode::Closed,
            domain: Domain::TwentyQuestions,
            open_set_size: 5,
        }
    }
}

impl SessionParams {
    pub fn validate(&self) -> Result<(), SessionError> {
        if self.max_turns == 0 {
            return Err(SessionError::InvalidParams("T must be at least 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(SessionError::InvalidParams("delta must lie in (0, 1)"));
        }
        if self.open_set_size == 0 {
            return Err(SessionError::InvalidParams("open set size must be at least 1"));
        }
        self.search.validate().map_err(|_| SessionError::InvalidParams("invalid search config"))
    }

    /// Strict, real-valued `t < δ·T`.
    pub fn in_information_window(&self, t: u32) -> bool {
        (t as f64) < self.delta * self.max_turns as f64
    }
}

/// Everything a session borrows from its dataset for one call. The caller
/// holds the dataset lock for the duration.
pub struct SessionDeps<'a> {
    pub tree: &'a mut QuestionTree,
    pub catalog: &'a mut Catalog,
    pub generator: &'a dyn crate::generate::QuestionGenerator,
    pub classifier: Option<&'a dyn AnswerClassifier>,
    pub renewer: Option<&'a dyn SetRenewer>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Pending {
    Info(QuestionId),
    Target(OutcomeId),
}

/// Extracts quoted spans delimited by straight or curly quotes/backticks.
fn quoted_spans(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let opens = ['\'', '"', '`', '\u{2018}', '\u{201c}'];
    let mut rest = text;
    while let Some(start) = rest.find(|c: char| opens.contains(&c)) {
        let open = rest[start..].chars().next().unwrap_or('\'');
        let close = match open {
            '\u{2018}' => '\u{2019}',
            '\u{201c}' => '\u{201d}',
            c => c,
        };
        let body = &rest[start + open.len_utf8()..];
        match body.find(close) {
            Some(end) => {
                out.push(&body[..end]);
                rest = &body[end + close.len_utf8()..];
            }
            None => break,
        }
    }
    out
}

fn leading_word(text: &str) -> String {
    let word: String = text.trim_start().chars().take_while(|c| c.is_alphabetic()).collect();
    word.to_lowercase()
}

/// Pattern rules first, the optional classifier last.
///
/// A confirmation phrase yields the quoted label when it names an outcome,
/// otherwise any outcome label contained in the text (longest first),
/// otherwise `last_target`.
pub fn interpret_answer(
    text: &str,
    question: &str,
    catalog: &Catalog,
    last_target: Option<&str>,
    classifier: Option<&dyn AnswerClassifier>,
) -> Result<AnswerInterpretation, SessionError> {
    let folded = casefold(text);
    if folded.contains("you guessed it") || folded.contains("you are right") {
        let quoted = quoted_spans(text).into_iter().find_map(|s| catalog.lookup(s).map(|id| catalog.label(id)));
        let contained = || {
            catalog
                .iter()
                .filter(|o| folded.contains(&casefold(&o.label)))
                .max_by_key(|o| o.label.len())
                .map(|o| o.label.as_str())
        };
        if let Some(label) = quoted.or_else(contained).or(last_target) {
            return Ok(AnswerInterpretation::TargetConfirmed(String::from(label)));
        }
        // A confirmation with nothing to confirm; a quoted span is still the best guess.
        if let Some(span) = quoted_spans(text).into_iter().find(|s| !s.trim().is_empty()) {
            return Ok(AnswerInterpretation::TargetConfirmed(String::from(span.trim())));
        }
        return Err(SessionError::UninterpretableAnswer(String::from(text)));
    }
    match leading_word(text).as_str() {
        "yes" => return Ok(AnswerInterpretation::Affirm),
        "no" => return Ok(AnswerInterpretation::Negate),
        _ => {}
    }
    if let Some(c) = classifier {
        return match c.classify(question, text)? {
            Some(Branch::Yes) => Ok(AnswerInterpretation::Affirm),
            Some(Branch::No) => Ok(AnswerInterpretation::Negate),
            None => Err(SessionError::UninterpretableAnswer(String::from(text))),
        };
    }
    Err(SessionError::UninterpretableAnswer(String::from(text)))
}

#[derive(Debug, Clone)]
pub struct Session {
    params: SessionParams,
    cluster: ClusterId,
    t: u32,
    node: AnswerId,
    initial_set: PossibilitySet,
    tried: BTreeSet<OutcomeId>,
    history: Vec<Exchange>,
    transcript: Vec<TranscriptRecord>,
    asked: Vec<QuestionId>,
    pending: Option<(Pending, Phase, String)>,
    status: Status,
    degraded: bool,
    feedback_propagated: bool,
    rng: ChaCha8Rng,
}

impl Session {
    /// Resolves the root for `initial_set` and emits the first question.
    pub fn start(
        params: SessionParams,
        cluster: ClusterId,
        initial_set: PossibilitySet,
        deps: &mut SessionDeps<'_>,
    ) -> Result<(Self, Step), SessionError> {
        params.validate()?;
        if initial_set.is_empty() {
            return Err(SessionError::EmptySet);
        }
        let node = deps.tree.find_or_create_root(&initial_set);
        let rng = ChaCha8Rng::seed_from_u64(params.search.rng_seed);
        let mut s = Session {
            params,
            cluster,
            t: 0,
            node,
            initial_set,
            tried: BTreeSet::new(),
            history: Vec::new(),
            transcript: Vec::new(),
            asked: Vec::new(),
            pending: None,
            status: Status::Active,
            degraded: false,
            feedback_propagated: false,
            rng,
        };
        let step = s.emit(deps);
        Ok((s, step))
    }

    pub fn status(&self) -> &Status {
        &self.status
    }

    pub fn turn(&self) -> u32 {
        self.t
    }

    pub fn params(&self) -> &SessionParams {
        &self.params
    }

    pub fn cluster(&self) -> ClusterId {
        self.cluster
    }

    pub fn node(&self) -> AnswerId {
        self.node
    }

    pub fn history(&self) -> &[Exchange] {
        &self.history
    }

    pub fn transcript(&self) -> &[TranscriptRecord] {
        &self.transcript
    }

    /// Questions asked during information seeking, in order.
    pub fn asked(&self) -> &[QuestionId] {
        &self.asked
    }

    pub fn initial_set(&self) -> &PossibilitySet {
        &self.initial_set
    }

    pub fn feedback_propagated(&self) -> bool {
        self.feedback_propagated
    }

    /// The question awaiting an answer, if any.
    pub fn pending_question(&self) -> Option<(Phase, &str)> {
        self.pending.as_ref().map(|(_, phase, text)| (*phase, text.as_str()))
    }

    /// The last outcome named by a targeting question, if that question is pending.
    pub fn pending_target(&self) -> Option<OutcomeId> {
        match self.pending {
            Some((Pending::Target(id), _, _)) => Some(id),
            _ => None,
        }
    }

    /// Interprets free text and advances.
    pub fn answer(&mut self, text: &str, deps: &mut SessionDeps<'_>) -> Result<Step, SessionError> {
        if self.status != Status::Active {
            return Err(SessionError::SessionClosed);
        }
        let (pending, _, question) = self.pending.as_ref().ok_or(SessionError::NoPendingQuestion)?;
        let last = match pending {
            Pending::Target(id) => Some(deps.catalog.label(*id)),
            Pending::Info(_) => None,
        };
        let interp = interpret_answer(text, question, deps.catalog, last, deps.classifier)?;
        self.apply(interp, text, deps)
    }

    /// Advances with an already-interpreted answer; `raw` is what the
    /// transcript records.
    pub fn apply(
        &mut self,
        interp: AnswerInterpretation,
        raw: &str,
        deps: &mut SessionDeps<'_>,
    ) -> Result<Step, SessionError> {
        if self.status != Status::Active {
            return Err(SessionError::SessionClosed);
        }
        let (pending, phase, question) = self.pending.take().ok_or(SessionError::NoPendingQuestion)?;
        self.history.push(Exchange { question: question.clone(), answer: String::from(raw) });

        let confirmed = match (&pending, &interp) {
            (_, AnswerInterpretation::TargetConfirmed(label)) => Some(label.clone()),
            (Pending::Target(id), AnswerInterpretation::Affirm) => Some(String::from(deps.catalog.label(*id))),
            _ => None,
        };
        if confirmed.is_none() {
            if let (Pending::Info(q), AnswerInterpretation::Affirm | AnswerInterpretation::Negate) = (&pending, &interp) {
                let branch = if interp == AnswerInterpretation::Affirm { Branch::Yes } else { Branch::No };
                self.node = deps.tree.question(*q).child(branch);
                if self.params.mode == Mode::Open {
                    if let Err(e) = self.renew(deps) {
                        self.record(phase, question, raw, deps);
                        return Err(e);
                    }
                }
            }
        }
        self.record(phase, question, raw, deps);

        if let Some(label) = confirmed {
            self.status = Status::Success { label, turns: self.t };
            propagate_feedback(deps.tree, &self.asked, self.cluster, &self.params.feedback);
            self.feedback_propagated = true;
            return Ok(Step::Finished(self.status.clone()));
        }
        if self.t >= self.params.max_turns {
            self.status = Status::Failure;
            return Ok(Step::Finished(Status::Failure));
        }
        Ok(self.emit(deps))
    }

    fn record(&mut self, phase: Phase, question: String, raw: &str, deps: &SessionDeps<'_>) {
        self.transcript.push(TranscriptRecord {
            // turn index of the question being answered
            turn: self.t - 1,
            phase,
            question,
            answer: String::from(raw),
            set_size_after: deps.tree.answer(self.node).set.len(),
        });
    }

    fn renew(&mut self, deps: &mut SessionDeps<'_>) -> Result<(), SessionError> {
        let Some(renewer) = deps.renewer else { return Ok(()) };
        let existing = deps.catalog.labels(&deps.tree.answer(self.node).set);
        let proposed = renewer.renew(&self.history, &existing, self.params.open_set_size)?;
        let mut set = PossibilitySet::new();
        for label in proposed {
            set.insert(deps.catalog.intern(&label)?);
        }
        if !set.is_empty() && !set.same_members(&deps.tree.answer(self.node).set) {
            self.node = deps.tree.find_or_create_root(&set);
        }
        Ok(())
    }

    fn emit(&mut self, deps: &mut SessionDeps<'_>) -> Step {
        let set_len = deps.tree.answer(self.node).set.len();
        if !self.degraded && set_len > 2 && self.params.in_information_window(self.t) {
            match plan_question(
                deps.tree,
                self.node,
                self.cluster,
                &self.params.search,
                deps.catalog,
                deps.generator,
                &mut self.rng,
            ) {
                Ok(q) => {
                    let text = deps.tree.question(q).partition.question.clone();
                    self.asked.push(q);
                    return self.ask(Pending::Info(q), Phase::InformationSeeking, text);
                }
                Err(_) => self.degraded = true,
            }
        }
        let node_set = &deps.tree.answer(self.node).set;
        let pick = node_set
            .iter()
            .find(|id| !self.tried.contains(id))
            .or_else(|| self.initial_set.iter().find(|id| !self.tried.contains(id)));
        match pick {
            Some(id) => {
                self.tried.insert(id);
                let text = self.params.domain.targeting_question(deps.catalog.label(id));
                self.ask(Pending::Target(id), Phase::Targeting, text)
            }
            None => {
                self.status = Status::Failure;
                Step::Finished(Status::Failure)
            }
        }
    }

    fn ask(&mut self, pending: Pending, phase: Phase, text: String) -> Step {
        let turn = self.t;
        self.t += 1;
        self.pending = Some((pending, phase, text.clone()));
        Step::Ask { turn, phase, question: text }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gateway::CallCounters;
    use crate::generate::OracleGenerator;
    use alloc::sync::Arc;
    use alloc::vec;

    fn bits(n: u32, width: usize) -> Catalog {
        let mut c = Catalog::new();
        for i in 0..n {
            c.push(&format!("o{i}"), Some((0..width).map(|b| i >> b & 1 == 1).collect())).unwrap();
        }
        c
    }

    #[test]
    fn information_window_is_strict_and_real_valued() {
        let p = SessionParams { max_turns: 6, delta: 0.6, ..SessionParams::default() };
        let info: Vec<u32> = (0..6).filter(|t| p.in_information_window(*t)).collect();
        assert_eq!(info, vec![0, 1, 2, 3]);
    }

    #[test]
    fn interpretation_rules() {
        let mut c = Catalog::new();
        c.push("Chameleon", None).unwrap();
        c.push("gastritis", None).unwrap();
        c.push("gastric ulcer", None).unwrap();
        let i = |t: &str| interpret_answer(t, "q?", &c, None, None);
        assert_eq!(
            i("You guessed it. X is 'Chameleon'.").unwrap(),
            AnswerInterpretation::TargetConfirmed(String::from("Chameleon"))
        );
        assert_eq!(i("Yes.").unwrap(), AnswerInterpretation::Affirm);
        assert_eq!(i("No.").unwrap(), AnswerInterpretation::Negate);
        assert_eq!(i("no, I'm not sure about that").unwrap(), AnswerInterpretation::Negate);
        assert_eq!(
            i("You are right. I have Gastritis.").unwrap(),
            AnswerInterpretation::TargetConfirmed(String::from("gastritis"))
        );
        assert!(matches!(i("Nothing like that"), Err(SessionError::UninterpretableAnswer(_))));
        assert!(matches!(i("Nobody knows"), Err(SessionError::UninterpretableAnswer(_))));
        let last = interpret_answer("You are right.", "q?", &c, Some("gastric ulcer"), None).unwrap();
        assert_eq!(last, AnswerInterpretation::TargetConfirmed(String::from("gastric ulcer")));
    }

    struct Always(Branch);

    impl AnswerClassifier for Always {
        fn classify(&self, _: &str, _: &str) -> Result<Option<Branch>, ProviderError> {
            Ok(Some(self.0))
        }
    }

    #[test]
    fn classifier_is_the_last_resort() {
        let c = Catalog::new();
        let cls = Always(Branch::No);
        let got = interpret_answer("It hurts after meals", "q?", &c, None, Some(&cls)).unwrap();
        assert_eq!(got, AnswerInterpretation::Negate);
        let got = interpret_answer("Yes, often", "q?", &c, None, Some(&cls)).unwrap();
        assert_eq!(got, AnswerInterpretation::Affirm);
    }

    fn truthful(step: &Step, s: &Session, tree: &QuestionTree, c: &Catalog, target: OutcomeId, d: Domain) -> String {
        let Step::Ask { phase, .. } = step else { panic!("finished") };
        match (phase, s.pending.as_ref().unwrap().0.clone()) {
            (Phase::InformationSeeking, Pending::Info(q)) => {
                if tree.question(q).partition.yes.contains(target) { "Yes.".into() } else { "No.".into() }
            }
            (_, Pending::Target(id)) if id == target => d.confirmation(c.label(id)),
            _ => "No.".into(),
        }
    }

    #[test]
    fn oracle_session_finds_target_by_halving() {
        let mut c = bits(8, 3);
        let mut tree = QuestionTree::new("ds");
        let gen = OracleGenerator::new(Arc::new(CallCounters::new()));
        let full = c.full_set();
        for target in full.iter() {
            let mut deps = SessionDeps { tree: &mut tree, catalog: &mut c, generator: &gen, classifier: None, renewer: None };
            let (mut s, mut step) = Session::start(SessionParams::default(), ClusterId(0), full.clone(), &mut deps).unwrap();
            while let Step::Ask { .. } = step {
                let ans = truthful(&step, &s, deps.tree, deps.catalog, target, Domain::TwentyQuestions);
                step = s.answer(&ans, &mut deps).unwrap();
                assert!(deps.tree.answer(s.node()).set.contains(target));
            }
            match s.status() {
                Status::Success { label, turns } => {
                    assert_eq!(label, deps.catalog.label(target));
                    assert!(*turns <= 4, "took {turns} turns");
                }
                other => panic!("unexpected {other:?}"),
            }
            assert!(s.feedback_propagated());
            assert_eq!(s.asked().len(), 2);
        }
    }

    struct Never;

    impl crate::generate::QuestionGenerator for Never {
        fn generate(
            &self,
            _: &crate::generate::GenerationRequest<'_>,
        ) -> Result<Vec<crate::types::Partition>, crate::generate::GenerationError> {
            Err(crate::generate::GenerationError::NoValidCandidates)
        }
    }

    #[test]
    fn planning_failure_degrades_to_targeting_and_budget_ends_in_failure() {
        let mut c = bits(8, 3);
        let mut tree = QuestionTree::new("ds");
        let mut deps = SessionDeps { tree: &mut tree, catalog: &mut c, generator: &Never, classifier: None, renewer: None };
        let params = SessionParams { max_turns: 3, ..SessionParams::default() };
        let (mut s, mut step) = Session::start(params, ClusterId(0), deps.catalog.full_set(), &mut deps).unwrap();
        let mut asked = Vec::new();
        while let Step::Ask { phase, question, .. } = step {
            assert_eq!(phase, Phase::Targeting);
            asked.push(question);
            step = s.answer("No.", &mut deps).unwrap();
        }
        assert_eq!(step, Step::Finished(Status::Failure));
        assert_eq!(asked, vec!["Is X 'o0'?", "Is X 'o1'?", "Is X 'o2'?"]);
        assert_eq!(s.turn(), 3);
        assert!(!s.feedback_propagated());
        assert_eq!(s.answer("Yes", &mut deps), Err(SessionError::SessionClosed));
    }

    #[test]
    fn targeting_walks_node_set_then_initial_set_then_gives_up() {
        let mut c = Catalog::new();
        for l in ["radiator leak", "hose leak"] {
            c.push(l, None).unwrap();
        }
        let mut tree = QuestionTree::new("ds");
        let gen = Never;
        let mut deps = SessionDeps { tree: &mut tree, catalog: &mut c, generator: &gen, classifier: None, renewer: None };
        let params = SessionParams { domain: Domain::Troubleshooting, ..SessionParams::default() };
        let (mut s, step) = Session::start(params, ClusterId(0), deps.catalog.full_set(), &mut deps).unwrap();
        assert_eq!(
            step,
            Step::Ask { turn: 0, phase: Phase::Targeting, question: String::from("Are you experiencing 'radiator leak'?") }
        );
        let step = s.answer("No.", &mut deps).unwrap();
        assert!(matches!(step, Step::Ask { ref question, .. } if question.contains("hose leak")));
        assert_eq!(s.answer("No.", &mut deps).unwrap(), Step::Finished(Status::Failure));
    }

    #[test]
    fn plain_yes_to_a_target_confirms_it() {
        let mut c = Catalog::new();
        for l in ["gastritis", "gastric ulcer"] {
            c.push(l, None).unwrap();
        }
        let mut tree = QuestionTree::new("ds");
        let mut deps = SessionDeps { tree: &mut tree, catalog: &mut c, generator: &Never, classifier: None, renewer: None };
        let params = SessionParams { domain: Domain::Medical, ..SessionParams::default() };
        let (mut s, _) = Session::start(params, ClusterId(0), deps.catalog.full_set(), &mut deps).unwrap();
        s.answer("No.", &mut deps).unwrap();
        let done = s.answer("Yes", &mut deps).unwrap();
        assert_eq!(done, Step::Finished(Status::Success { label: String::from("gastric ulcer"), turns: 2 }));
    }

    #[test]
    fn uninterpretable_answer_leaves_state_untouched() {
        let mut c = bits(8, 3);
        let mut tree = QuestionTree::new("ds");
        let gen = OracleGenerator::default();
        let mut deps = SessionDeps { tree: &mut tree, catalog: &mut c, generator: &gen, classifier: None, renewer: None };
        let (mut s, _) = Session::start(SessionParams::default(), ClusterId(0), deps.catalog.full_set(), &mut deps).unwrap();
        assert!(s.answer("maybe?", &mut deps).is_err());
        assert_eq!(s.turn(), 1);
        assert!(s.pending_question().is_some());
        assert!(s.history().is_empty());
    }
}
