//! The loop vulnerability taxonomy: three categories, twenty-five patterns.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Top-level grouping of loop vulnerabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Category {
    LoopControlLogic,
    SecurityInLoop,
    ResourceEfficiency,
}

impl Category {
    pub const ALL: [Category; 3] = [
        Category::LoopControlLogic,
        Category::SecurityInLoop,
        Category::ResourceEfficiency,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Category::LoopControlLogic => "loop_control_logic",
            Category::SecurityInLoop => "security_in_loop",
            Category::ResourceEfficiency => "resource_efficiency",
        }
    }

    /// Human-readable title used in reports and prompts.
    pub fn title(self) -> &'static str {
        match self {
            Category::LoopControlLogic => "Loop Control and Logic Errors",
            Category::SecurityInLoop => "Security Risks Inside Loops",
            Category::ResourceEfficiency => "Resource Management and Efficiency Issues",
        }
    }

    /// Every pattern of this category in catalog order.
    pub fn kinds(self) -> impl Iterator<Item = PatternKind> {
        PatternKind::ALL
            .into_iter()
            .filter(move |k| k.category() == self)
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown {what} identifier `{value}`")]
pub struct UnknownIdentifier {
    pub what: &'static str,
    pub value: String,
}

impl FromStr for Category {
    type Err = UnknownIdentifier;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Category::ALL
            .into_iter()
            .find(|c| c.id() == s)
            .ok_or_else(|| UnknownIdentifier {
                what: "category",
                value: s.to_string(),
            })
    }
}

/// One of the twenty-five loop vulnerability patterns.
///
/// Declaration order is the catalog order; `Ord` follows it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PatternKind {
    InfiniteLoop,
    OffByOne,
    ControlFlowMisuse,
    LoopVarReassignment,
    DeadUnreachableCode,

    SensitiveDataLogging,
    TimingSideChannel,
    MissingAuthorization,
    InsecureEvalInjection,
    UnvalidatedLoopBound,
    ResourceExhaustion,
    UnencryptedSensitiveStorage,
    HardcodedSecret,
    UnsafeNetworkFileOp,
    MissingExceptionHandling,

    InvariantRecompute,
    RedundantObjectCreation,
    StringConcatInLoop,
    MissingLazyEvaluation,
    AvoidableNestedLoop,
    InefficientMembershipCheck,
    MissingBuiltinComprehension,
    RedundantIOInLoop,
    UnusedAccumulation,
    RangeLenAntipattern,
}

impl PatternKind {
    pub const ALL: [PatternKind; 25] = [
        PatternKind::InfiniteLoop,
        PatternKind::OffByOne,
        PatternKind::ControlFlowMisuse,
        PatternKind::LoopVarReassignment,
        PatternKind::DeadUnreachableCode,
        PatternKind::SensitiveDataLogging,
        PatternKind::TimingSideChannel,
        PatternKind::MissingAuthorization,
        PatternKind::InsecureEvalInjection,
        PatternKind::UnvalidatedLoopBound,
        PatternKind::ResourceExhaustion,
        PatternKind::UnencryptedSensitiveStorage,
        PatternKind::HardcodedSecret,
        PatternKind::UnsafeNetworkFileOp,
        PatternKind::MissingExceptionHandling,
        PatternKind::InvariantRecompute,
        PatternKind::RedundantObjectCreation,
        PatternKind::StringConcatInLoop,
        PatternKind::MissingLazyEvaluation,
        PatternKind::AvoidableNestedLoop,
        PatternKind::InefficientMembershipCheck,
        PatternKind::MissingBuiltinComprehension,
        PatternKind::RedundantIOInLoop,
        PatternKind::UnusedAccumulation,
        PatternKind::RangeLenAntipattern,
    ];

    pub fn category(self) -> Category {
        use PatternKind::*;
        match self {
            InfiniteLoop | OffByOne | ControlFlowMisuse | LoopVarReassignment
            | DeadUnreachableCode => Category::LoopControlLogic,
            SensitiveDataLogging | TimingSideChannel | MissingAuthorization
            | InsecureEvalInjection | UnvalidatedLoopBound | ResourceExhaustion
            | UnencryptedSensitiveStorage | HardcodedSecret | UnsafeNetworkFileOp
            | MissingExceptionHandling => Category::SecurityInLoop,
            InvariantRecompute | RedundantObjectCreation | StringConcatInLoop
            | MissingLazyEvaluation | AvoidableNestedLoop | InefficientMembershipCheck
            | MissingBuiltinComprehension | RedundantIOInLoop | UnusedAccumulation
            | RangeLenAntipattern => Category::ResourceEfficiency,
        }
    }

    /// Stable lower-snake identifier used in files and prompts.
    pub fn id(self) -> &'static str {
        use PatternKind::*;
        match self {
            InfiniteLoop => "infinite_loop",
            OffByOne => "off_by_one",
            ControlFlowMisuse => "control_flow_misuse",
            LoopVarReassignment => "loop_var_reassignment",
            DeadUnreachableCode => "dead_unreachable_code",
            SensitiveDataLogging => "sensitive_data_logging",
            TimingSideChannel => "timing_side_channel",
            MissingAuthorization => "missing_authorization",
            InsecureEvalInjection => "insecure_eval_injection",
            UnvalidatedLoopBound => "unvalidated_loop_bound",
            ResourceExhaustion => "resource_exhaustion",
            UnencryptedSensitiveStorage => "unencrypted_sensitive_storage",
            HardcodedSecret => "hardcoded_secret",
            UnsafeNetworkFileOp => "unsafe_network_file_op",
            MissingExceptionHandling => "missing_exception_handling",
            InvariantRecompute => "invariant_recompute",
            RedundantObjectCreation => "redundant_object_creation",
            StringConcatInLoop => "string_concat_in_loop",
            MissingLazyEvaluation => "missing_lazy_evaluation",
            AvoidableNestedLoop => "avoidable_nested_loop",
            InefficientMembershipCheck => "inefficient_membership_check",
            MissingBuiltinComprehension => "missing_builtin_comprehension",
            RedundantIOInLoop => "redundant_io_in_loop",
            UnusedAccumulation => "unused_accumulation",
            RangeLenAntipattern => "range_len_antipattern",
        }
    }

    pub fn title(self) -> &'static str {
        use PatternKind::*;
        match self {
            InfiniteLoop => "Infinite loop",
            OffByOne => "Off-by-one error",
            ControlFlowMisuse => "Control flow misuse",
            LoopVarReassignment => "Loop variable reassignment",
            DeadUnreachableCode => "Dead or unreachable code",
            SensitiveDataLogging => "Sensitive data leaked through logs",
            TimingSideChannel => "Timing side channel",
            MissingAuthorization => "Missing authorization check",
            InsecureEvalInjection => "Code injection through eval/exec",
            UnvalidatedLoopBound => "Unvalidated user-controlled loop bound",
            ResourceExhaustion => "Resource exhaustion",
            UnencryptedSensitiveStorage => "Unencrypted sensitive storage",
            HardcodedSecret => "Hardcoded secret",
            UnsafeNetworkFileOp => "Unsafe network or file operation",
            MissingExceptionHandling => "Missing exception handling",
            InvariantRecompute => "Loop-invariant recomputation",
            RedundantObjectCreation => "Redundant object creation",
            StringConcatInLoop => "String concatenation in loop",
            MissingLazyEvaluation => "Missing lazy evaluation",
            AvoidableNestedLoop => "Avoidable nested loop",
            InefficientMembershipCheck => "Inefficient membership check",
            MissingBuiltinComprehension => "Missing comprehension or builtin",
            RedundantIOInLoop => "Redundant I/O in loop",
            UnusedAccumulation => "Unused accumulation",
            RangeLenAntipattern => "range(len(...)) antipattern",
        }
    }

    /// One-sentence description of the pattern.
    pub fn description(self) -> &'static str {
        use PatternKind::*;
        match self {
            InfiniteLoop => "The loop's exit condition can never become false because the variables it depends on are not updated and nothing else leaves the loop.",
            OffByOne => "A loop boundary is one unit away from the intended range, so the loop runs one time too many or too few.",
            ControlFlowMisuse => "break, continue or a loop else clause is used so that a branch the author expects to run can never run.",
            LoopVarReassignment => "The loop control variable is overwritten inside the body, which confuses later logic that reads it.",
            DeadUnreachableCode => "A branch inside the loop depends on a condition whose outcome the loop range already fixes, so one side is never executed.",
            SensitiveDataLogging => "Secrets such as passwords or tokens are printed or logged on every iteration.",
            TimingSideChannel => "A delay inside the loop depends on user-supplied values, letting an observer infer data from response times.",
            MissingAuthorization => "A destructive operation is triggered from loop input without first checking the caller's permission.",
            InsecureEvalInjection => "eval or exec is applied to non-literal data inside a loop, allowing arbitrary code execution.",
            UnvalidatedLoopBound => "The number of iterations comes from user input that is never bounded, enabling denial of service.",
            ResourceExhaustion => "Files or sockets are created for every element of an unbounded or user-supplied collection.",
            UnencryptedSensitiveStorage => "Sensitive records are written to storage in plaintext from inside the loop.",
            HardcodedSecret => "A credential is embedded as a string literal inside the loop.",
            UnsafeNetworkFileOp => "Network or file targets derived from loop input are accessed without validation or a timeout.",
            MissingExceptionHandling => "A call that may raise is executed in the loop without a try block, so one failure stops the whole loop.",
            InvariantRecompute => "A value that does not change between iterations is recomputed on every iteration.",
            RedundantObjectCreation => "An identical object is constructed on every iteration although it could be created once and reused.",
            StringConcatInLoop => "A string is grown with += inside the loop, copying the accumulated text every time.",
            MissingLazyEvaluation => "A large list is materialized in memory although it is only ever iterated once.",
            AvoidableNestedLoop => "A nested loop compares every pair of elements of one sequence where a set or dictionary would avoid quadratic time.",
            InefficientMembershipCheck => "Membership is tested against a list inside a loop, costing linear time per check instead of constant time with a set.",
            MissingBuiltinComprehension => "A loop only appends a transformed element to a list, which a comprehension expresses directly.",
            RedundantIOInLoop => "Output is written to a file on every iteration instead of being buffered and written once.",
            UnusedAccumulation => "A large list is accumulated inside the loop but never read afterwards, retaining memory for nothing.",
            RangeLenAntipattern => "The loop iterates over range(len(...)) only to index sequences, where enumerate or zip is clearer and safer.",
        }
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for PatternKind {
    type Err = UnknownIdentifier;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PatternKind::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| UnknownIdentifier {
                what: "pattern kind",
                value: s.to_string(),
            })
    }
}

macro_rules! id_serde {
    ($ty:ty, $expecting:literal) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str(self.id())
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let raw = String::deserialize(deserializer)?;
                raw.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

id_serde!(Category, "category identifier");
id_serde!(PatternKind, "pattern kind identifier");

/// One catalog row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CatalogEntry {
    pub kind: PatternKind,
    pub category: Category,
    pub description: &'static str,
}

/// All twenty-five patterns in catalog order, grouped by category.
pub fn catalog() -> Vec<CatalogEntry> {
    PatternKind::ALL
        .into_iter()
        .map(|kind| CatalogEntry {
            kind,
            category: kind.category(),
            description: kind.description(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_has_25_entries_split_5_10_10() {
        let cat = catalog();
        assert_eq!(cat.len(), 25);
        let count = |c| cat.iter().filter(|e| e.category == c).count();
        assert_eq!(count(Category::LoopControlLogic), 5);
        assert_eq!(count(Category::SecurityInLoop), 10);
        assert_eq!(count(Category::ResourceEfficiency), 10);
    }

    #[test]
    fn named_entries_have_expected_categories() {
        let cat = catalog();
        let find = |k| cat.iter().find(|e| e.kind == k).unwrap().category;
        assert_eq!(find(PatternKind::InfiniteLoop), Category::LoopControlLogic);
        assert_eq!(find(PatternKind::HardcodedSecret), Category::SecurityInLoop);
    }

    #[test]
    fn identifiers_are_unique_lower_snake_and_parse_back() {
        let mut seen = std::collections::HashSet::new();
        for k in PatternKind::ALL {
            assert!(seen.insert(k.id()));
            assert!(k.id().chars().all(|c| c.is_ascii_lowercase() || c == '_'));
            assert_eq!(k.id().parse::<PatternKind>().unwrap(), k);
        }
        for c in Category::ALL {
            assert_eq!(c.id().parse::<Category>().unwrap(), c);
        }
        assert!("buffer_overflow".parse::<PatternKind>().is_err());
    }

    #[test]
    fn no_identifier_is_a_substring_of_another() {
        for a in PatternKind::ALL {
            for b in PatternKind::ALL {
                if a != b {
                    assert!(!a.id().contains(b.id()), "{a} contains {b}");
                }
            }
        }
    }

    #[test]
    fn descriptions_are_single_sentences() {
        for e in catalog() {
            assert_eq!(e.description.matches(". ").count(), 0, "{}", e.kind);
            assert!(e.description.ends_with('.'));
        }
    }
}
