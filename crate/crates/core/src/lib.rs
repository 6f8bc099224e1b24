//! Core planning engine for adaptive information-seeking dialogues.
//!
//! A conversation narrows a set of candidate outcomes by asking yes/no
//! questions. Candidate questions live in a cached, alternating tree of
//! answer nodes (surviving possibility sets) and question nodes (binary
//! partitions carrying search statistics). Each turn, a depth-limited Monte
//! Carlo Tree Search rooted at the current answer node picks the question with
//! the highest expected entropy reward. Successful conversations feed a
//! cluster-specific, depth-decayed bonus back into the tree so that similar
//! future problems prefer trajectories that worked before.
//!
//! The crate is `no_std` (it needs `alloc`). Anything touching files, the
//! network or prompts lives in the `inquest` companion crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bounds;
pub mod cluster;
pub mod gateway;
pub mod generate;
pub mod planner;
pub mod rewards;
pub mod session;
pub mod tree;
pub mod types;

pub use bounds::{qgc_bounds, QgcBounds};
pub use cluster::{
    propagate_feedback, recompute_medoid, Cluster, ClusterError, ClusterId, ClusterStore,
    Embedding, FeedbackConfig, HashedBagOfWords,
};
pub use gateway::{CallCounters, ChatMessage, ChatProvider, ChatRequest, EmbeddingProvider, ProviderError, Role};
pub use generate::{
    GenerationError, GenerationRequest, OracleGenerator, QuestionGenerator, RawPartition,
};
pub use planner::{backpropagate, plan_question, simulate_rollout, uct_score, PlanError, SearchConfig};
pub use rewards::{accumulated_reward, expected_reward, information_gain, RewardConfig, RewardError};
pub use session::{
    interpret_answer, AnswerClassifier, AnswerInterpretation, Domain, Exchange, Mode, Phase,
    Session, SessionDeps, SessionError, SessionParams, SetRenewer, Status, Step, TranscriptRecord,
};
pub use tree::{AnswerId, AnswerNode, Branch, NodeRef, QuestionId, QuestionNode, QuestionTree, TreeError};
pub use types::{
    casefold, normalize_partition, Catalog, CatalogError, Outcome, OutcomeId, Partition,
    PartitionError, PossibilitySet,
};
