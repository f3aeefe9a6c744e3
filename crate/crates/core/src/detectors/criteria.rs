//! Human-readable description of each rule, reused by reports and prompts.

use serde::Serialize;

use crate::corpus::PatternKind;

/// Firing criterion, anchor line and known limitations of one rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RuleCriteria {
    pub kind: PatternKind,
    pub criterion: &'static str,
    pub anchor: &'static str,
    pub limitations: &'static str,
}

pub fn detector_criteria(kind: PatternKind) -> RuleCriteria {
    use PatternKind::*;
    let (criterion, anchor, limitations) = match kind {
        InfiniteLoop => (
            "A while loop whose condition is constant-true or reads only plain variables, with no mutation of condition variables and no break/return/raise in the body.",
            "the while header",
            "Changes made by called functions or other threads are invisible to the rule.",
        ),
        OffByOne => (
            "A range whose endpoints differ by exactly one from an intent comment above the loop, or a range stop that is also used as an inclusive (<=) bound nearby.",
            "the loop header",
            "Heuristic and intent-dependent: without a stated intent the correct bound cannot be known.",
        ),
        ControlFlowMisuse => (
            "A loop with an else clause whose body has an unconditional break or a break under a test that holds for some iteration, so the else block is effectively dead or misleading.",
            "the else line",
            "Only constant ranges and constant-true tests are evaluated.",
        ),
        LoopVarReassignment => (
            "An assignment, augmented assignment or walrus binding to a for-loop target inside its body.",
            "the assignment line",
            "Deliberate rebinding (e.g. normalizing the value) is also reported.",
        ),
        DeadUnreachableCode => (
            "An if test comparing the variable of a constant range against a constant that is always true or always false over that range.",
            "the first line of the unreachable branch",
            "Only constant ranges and single comparisons are evaluated.",
        ),
        SensitiveDataLogging => (
            "A print or logging call inside a loop whose arguments reference a name, attribute or key from the secret lexicon.",
            "the call line",
            "Lexicon based; values with innocuous names are missed and masked values may still be reported.",
        ),
        TimingSideChannel => (
            "A sleep-like call inside a loop, guarded by a comparison over request or user-derived data.",
            "the sleep call line",
            "Data-dependent timing from anything other than explicit sleeps is not modeled.",
        ),
        MissingAuthorization => (
            "A call matching the destructive lexicon, guarded only by equality tests on request fields, with no authorization-lexicon call in the loop.",
            "the destructive call line",
            "Authorization performed by callers or decorators is invisible to the rule.",
        ),
        InsecureEvalInjection => (
            "An eval or exec call inside a loop whose argument is not a string literal.",
            "the call line",
            "Other dynamic-execution sinks (pickle, yaml.load, subprocess with shell) are not covered.",
        ),
        UnvalidatedLoopBound => (
            "A range bound or while comparison reading input(), sys.argv or a name tagged user-controlled, with no min() clamp and no dominating comparison that rebinds or rejects it.",
            "the loop header",
            "Only one assignment step from the input source is followed.",
        ),
        ResourceExhaustion => (
            "A file opened for writing or an unclosed socket created inside a loop over a user-controlled iterable without a slice bound, or inside while True.",
            "the open or socket line",
            "Whether the iterable is user-controlled is inferred from names and pragmas.",
        ),
        UnencryptedSensitiveStorage => (
            "A write call inside a loop whose argument references the secret lexicon and contains no encryption, hashing or masking call.",
            "the write line",
            "Lexicon based; encryption performed before the loop is not tracked.",
        ),
        HardcodedSecret => (
            "A non-empty string literal assigned inside a loop to a secret-lexicon name, or passed to an authentication call or as a secret keyword argument.",
            "the literal line",
            "Placeholder or test values are reported like real secrets.",
        ),
        UnsafeNetworkFileOp => (
            "A connect, urlopen, HTTP client or read-mode open call whose target derives from the loop variable, with no validation call or allowlist test and no timeout in the loop.",
            "the connect or open line",
            "Validation done before the loop or inside called helpers is not seen.",
        ),
        MissingExceptionHandling => (
            "In a sample marked exception-prone, a loop body made only of call statements with no enclosing try.",
            "the first non-logging call line",
            "Off by default because nearly any call can raise; enable per sample or via configuration.",
        ),
        InvariantRecompute => (
            "An assignment in a loop whose value uses an operator or a pure builtin call and whose free variables are never rebound or resized in the body.",
            "the assignment line",
            "Only builtins known to be pure are trusted; user functions are assumed impure.",
        ),
        RedundantObjectCreation => (
            "A dict, list or set display built in a loop from loop-invariant values and bound to a name that is never mutated.",
            "the construction line",
            "Objects handed to callers that mutate them are still reported.",
        ),
        StringConcatInLoop => (
            "An augmented += on a name whose last binding before the loop is a string literal.",
            "the += line",
            "Type inference is limited to the initializer literal.",
        ),
        MissingLazyEvaluation => (
            "A list comprehension over range(n) with constant n of at least the large-collection threshold, bound to a name that is only iterated afterwards.",
            "the comprehension line",
            "Non-constant sizes are not evaluated.",
        ),
        AvoidableNestedLoop => (
            "A loop nested directly inside another over the same sequence, comparing the outer element with the inner element by equality.",
            "the inner loop header",
            "Only direct iteration and range(len(...)) index loops are recognized.",
        ),
        InefficientMembershipCheck => (
            "An in / not in test inside a loop against a name bound to a list before the loop and not modified in it.",
            "the test line",
            "Lists that are small by construction are reported as well.",
        ),
        MissingBuiltinComprehension => (
            "A loop whose whole body is a single append of a pure expression of the loop variable to a list initialized empty before the loop.",
            "the append line",
            "Loops with filtering or several statements are not reported.",
        ),
        RedundantIOInLoop => (
            "An unconditional write call in a loop body on a handle opened before the loop.",
            "the write line",
            "Buffered file objects may already amortize the cost.",
        ),
        UnusedAccumulation => (
            "A list appended to in a constant loop of at least the large-collection threshold and never read after the loop.",
            "the append line",
            "Reads through aliases or other modules are not tracked.",
        ),
        RangeLenAntipattern => (
            "A for over range(len(...)) whose loop variable is used only as an index-subscript in reads of that sequence or a parallel one.",
            "the loop header",
            "Index arithmetic or stores through the index suppress the rule.",
        ),
    };
    RuleCriteria {
        kind,
        criterion,
        anchor,
        limitations,
    }
}
