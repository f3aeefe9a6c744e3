//! Seeded corpus: one vulnerable and one corrected sample per pattern kind.
//!
//! Templates use `$name` placeholders filled from identifier pools and
//! constant ranges; perturbation never touches control structure. A line
//! ending in `@@` is an annotated line (the marker is stripped).

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::{Captures, Regex};

use super::{Category, CodeSample, GroundTruthAnnotation, PatternKind};

const MARKER: &str = "@@";

struct Vars {
    rng: ChaCha8Rng,
    values: HashMap<&'static str, String>,
    used: HashSet<String>,
}

impl Vars {
    /// Picks an identifier not used by another placeholder of this template.
    fn pick(&mut self, key: &'static str, pool: &[&str]) {
        let fresh: Vec<&str> = pool.iter().copied().filter(|p| !self.used.contains(*p)).collect();
        let value = fresh.choose(&mut self.rng).expect("identifier pool exhausted").to_string();
        self.used.insert(value.clone());
        self.values.insert(key, value);
    }

    /// Picks matching entries from parallel pools (e.g. a collection and
    /// its element name).
    fn pick_pair(&mut self, keys: (&'static str, &'static str), pool: &[(&str, &str)]) {
        let (a, b) = *pool.choose(&mut self.rng).expect("non-empty pool");
        self.used.insert(a.to_string());
        self.used.insert(b.to_string());
        self.values.insert(keys.0, a.to_string());
        self.values.insert(keys.1, b.to_string());
    }

    fn num(&mut self, key: &'static str, range: std::ops::RangeInclusive<i64>) -> i64 {
        let v = self.rng.gen_range(range);
        self.values.insert(key, v.to_string());
        v
    }

    fn set(&mut self, key: &'static str, value: impl ToString) {
        self.values.insert(key, value.to_string());
    }

    fn render(&self, template: &str) -> String {
        static PLACEHOLDER: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
        let re = PLACEHOLDER.get_or_init(|| Regex::new(r"\$([a-z_]+)").expect("valid placeholder pattern"));
        re.replace_all(template, |c: &Captures<'_>| {
            self.values
                .get(&c[1])
                .unwrap_or_else(|| panic!("template placeholder `{}` is unbound", &c[1]))
                .clone()
        })
        .into_owned()
    }
}

struct Template {
    kind: PatternKind,
    note: &'static str,
    bind: fn(&mut Vars),
    vulnerable: &'static str,
    clean: &'static str,
}

// Identifier pools. None of these contain a lexicon word unless the role
// requires one (secret names, user-controlled collections).
const INDEX: &[&str] = &["i", "j", "k", "idx", "pos", "n"];
const COUNTER: &[&str] = &["count", "step", "tick", "cycle", "pass_no"];
const ELEMENT: &[&str] = &["item", "entry", "element", "row", "piece", "unit"];
const SECRET: &[&str] = &["password", "api_token", "secret_key", "db_passwd", "credential"];
const MESSAGE: &[&str] = &["working", "still running", "waiting", "polling", "busy"];
const TASK_FN: &[&str] = &["perform_task", "do_work", "run_step", "process", "execute_job"];
const FILE_HANDLE: &[&str] = &["f", "fh", "out", "handle", "stream"];
const BUFFER: &[&str] = &["buffer", "buf", "chunks_io", "text_io"];
const PEOPLE: &[(&str, &str)] = &[
    ("accounts", "account"),
    ("members", "member"),
    ("customers", "customer"),
    ("employees", "employee"),
];
const PERSON_NAMES: &[&str] = &["Alice", "Bob", "Charlie", "Dana", "Erin", "Frank", "Grace"];

fn bind_infinite(v: &mut Vars) {
    v.pick("counter", COUNTER);
    v.num("limit", 3..=9);
    v.pick("msg", MESSAGE);
}

fn bind_off_by_one(v: &mut Vars) {
    v.pick("var", INDEX);
    let lo = v.num("lo", 0..=3);
    let hi = lo + v.rng.gen_range(3..=8);
    v.set("hi", hi);
    v.set("hi_plus", hi + 1);
}

fn bind_control_flow(v: &mut Vars) {
    v.pick("var", INDEX);
    let n = v.num("n", 4..=9);
    v.num("stop", 1..=n - 1);
    v.pick("flag", &["found", "hit", "matched", "stopped"]);
    v.pick("msg", &["loop completed without break", "no match found", "scan finished"]);
}

fn bind_reassign(v: &mut Vars) {
    v.pick("var", INDEX);
    v.pick("other", &["shifted", "offset_value", "adjusted", "moved"]);
    v.num("n", 3..=9);
    v.num("reset", 0..=2);
}

fn bind_dead_code(v: &mut Vars) {
    v.pick("var", INDEX);
    let n = v.num("n", 3..=8);
    v.num("big", n + 1..=n + 20);
    v.num("mid", 1..=n - 1);
    v.pick("msg_a", &["always true", "in range", "small"]);
    v.pick("msg_b", &["never reached", "out of range", "large"]);
}

fn bind_logging(v: &mut Vars) {
    v.pick_pair(("group", "person"), PEOPLE);
    v.pick("secret", SECRET);
    v.pick("fetch", &["get_password", "load_secret", "fetch_token", "read_credential"]);
    v.pick("verb", &["Authenticating", "Checking in", "Processing", "Signing in"]);
}

fn bind_timing(v: &mut Vars) {
    v.pick_pair(
        ("attempts", "attempt"),
        &[
            ("login_attempts", "attempt"),
            ("submissions", "submission"),
            ("sign_ins", "sign_in"),
            ("candidates", "candidate"),
        ],
    );
    v.pick("admin", &["admin", "root", "superuser", "operator"]);
    v.pick("validate", &["validate_login", "verify_login", "check_login"]);
    let ms = v.rng.gen_range(1..=9);
    v.set("delay", format!("0.{ms}"));
}

fn bind_authorization(v: &mut Vars) {
    v.pick("requests", &["incoming_requests", "pending_requests", "queued_requests"]);
    v.pick("req", &["request", "req", "incoming"]);
    v.pick("destroy", &["delete_all_data", "drop_tables", "purge_accounts", "remove_everything"]);
    v.pick("action", &["delete_all", "drop_all", "purge", "wipe"]);
    v.pick("authz", &["is_admin", "check_permission", "authorize"]);
}

fn bind_eval(v: &mut Vars) {
    v.pick("exprs", &["user_submitted_code", "uploaded_formulas", "untrusted_expressions"]);
    v.pick("expr", &["expr", "source_text", "formula", "snippet"]);
    v.pick("result", &["result", "value", "outcome", "answer"]);
}

fn bind_loop_bound(v: &mut Vars) {
    v.pick("var", INDEX);
    v.pick("task", TASK_FN);
    v.pick("cap", &["MAX_ITERATIONS", "ITERATION_CAP", "UPPER_LIMIT"]);
    v.num("capval", 10..=500);
    v.pick("prompt", &["How many iterations? ", "Repeat count: ", "Number of rounds? "]);
}

fn bind_exhaustion(v: &mut Vars) {
    v.pick("files", &["user_supplied_filenames", "uploaded_paths", "requested_files", "untrusted_names"]);
    v.pick("fname", &["filename", "path", "target_file", "name"]);
    v.pick("fh", FILE_HANDLE);
    v.pick("mode", &["w", "a"]);
    v.pick("maxname", &["MAX_FILES", "FILE_LIMIT", "BATCH_CAP"]);
    v.num("maxval", 5..=50);
    let size = v.rng.gen_range(1..=9) * 100_000;
    v.set("size", size);
}

fn bind_storage(v: &mut Vars) {
    v.pick_pair(
        ("records", "rec"),
        &[("sensitive_records", "record"), ("patient_rows", "row"), ("customer_rows", "entry")],
    );
    v.pick("field", &["ssn", "password", "api_key"]);
    v.pick("dump", &["temp_dump.txt", "cache.csv", "export.tmp"]);
    v.pick("fh", FILE_HANDLE);
    v.pick("protect", &["encrypt", "hash_value", "mask"]);
}

fn bind_hardcoded(v: &mut Vars) {
    v.pick_pair(("group", "person"), PEOPLE);
    v.pick("secret", SECRET);
    v.pick("authfn", &["authenticate", "login", "auth_client"]);
    v.pick("literal", &["HARDCODED_SECRET_12345", "s3cr3t-value-77", "sk_live_abc123", "hunter2"]);
    v.pick("envvar", &["API_TOKEN", "SERVICE_SECRET", "APP_PASSWORD"]);
}

fn bind_network(v: &mut Vars) {
    v.pick("hosts", &["user_input_hosts", "requested_hosts", "submitted_hosts"]);
    v.pick("host", &["host", "address", "server"]);
    v.pick("sock", &["s", "sock", "conn_socket"]);
    v.pick("port", &["80", "8080", "443"]);
    v.pick("allowlist", &["ALLOWED_HOSTS", "HOST_ALLOWLIST", "WHITELISTED_HOSTS"]);
    v.num("timeout", 2..=10);
}

fn bind_exceptions(v: &mut Vars) {
    v.pick_pair(("tasks", "task"), &[("tasks", "task"), ("jobs", "job"), ("batches", "batch")]);
    v.pick("process", TASK_FN);
    v.pick("report", &["log_failure", "record_error", "note_problem"]);
}

fn bind_invariant(v: &mut Vars) {
    v.pick("data", &["data", "values", "samples", "series"]);
    v.pick("i", INDEX);
    v.pick("hoist", &["sqrt_len", "scale", "norm", "factor"]);
    v.pick("exp", &["0.5", "2", "3"]);
    v.num("n", 1_000..=20_000);
}

fn bind_object(v: &mut Vars) {
    v.pick("obj", &["temp", "template", "defaults", "settings"]);
    v.pick("k", &["key", "mode", "kind", "label"]);
    v.pick("val", &["value", "fast", "plain", "default"]);
    v.pick("consume", &["use", "emit", "render", "consume"]);
    v.num("n", 1_000..=20_000);
}

fn bind_concat(v: &mut Vars) {
    v.pick("acc", &["result", "text", "output", "joined"]);
    v.pick("buf", BUFFER);
    v.pick("i", INDEX);
    v.num("n", 100..=5_000);
}

fn bind_lazy(v: &mut Vars) {
    v.pick("batch", &["batch", "round_no", "epoch", "phase"]);
    v.pick("squares", &["squares", "cubes_list", "products", "table"]);
    v.pick("x", &["x", "v", "z", "q"]);
    v.num("batches", 2..=5);
    v.pick("big", &["10**6", "10**5", "500000", "2 * 10**5"]);
}

fn bind_nested(v: &mut Vars) {
    v.pick("nums", &["nums", "numbers", "values", "readings"]);
    v.pick("dups", &["duplicates", "repeated", "dupes"]);
    v.pick("seen", &["seen", "visited", "observed"]);
    v.pick("i", &["i", "a"]);
    v.pick("j", &["j", "b"]);
    v.pick("x", ELEMENT);
    let n = v.num("n", 100..=2_000);
    v.set("dup", n - 1);
}

fn bind_membership(v: &mut Vars) {
    v.pick("items", &["items", "catalog", "inventory", "pool"]);
    v.pick("targets", &["search_targets", "wanted", "lookups", "probes"]);
    v.pick("t", &["target", "probe", "wanted_id", "needle"]);
    v.num("n", 1_000..=20_000);
    v.num("m", 100..=5_000);
}

fn bind_builtin(v: &mut Vars) {
    v.pick("nums", &["nums", "numbers", "values", "readings"]);
    v.pick("out", &["squares", "scaled", "doubled", "results"]);
    v.pick("x", &["n", "x", "v"]);
    v.pick("y", &["y", "w", "sq"]);
    v.num("n", 100..=5_000);
    v.num("factor", 2..=9);
}

fn bind_io(v: &mut Vars) {
    v.pick("path", &["output.txt", "report.log", "lines.out"]);
    v.pick("fh", FILE_HANDLE);
    v.pick("buf", BUFFER);
    v.pick("i", INDEX);
    v.num("n", 100..=5_000);
}

fn bind_unused(v: &mut Vars) {
    v.pick("results", &["results", "squares", "cache", "history"]);
    v.pick("total", &["total", "running_sum", "acc"]);
    v.pick("i", INDEX);
    v.pick("big", &["1000000", "200000", "10**6", "500000"]);
}

fn bind_range_len(v: &mut Vars) {
    v.pick("names", &["names", "labels", "people"]);
    v.pick("ages", &["ages", "scores", "heights"]);
    v.pick("name", &["name", "label", "person"]);
    v.pick("age", &["age", "score", "height"]);
    v.pick("i", INDEX);
    let chosen: Vec<&str> = PERSON_NAMES.choose_multiple(&mut v.rng, 3).copied().collect();
    v.set("a", chosen[0]);
    v.set("b", chosen[1]);
    v.set("c", chosen[2]);
    v.num("x", 18..=40);
    v.num("y", 18..=40);
    v.num("z", 18..=40);
}

const TEMPLATES: &[Template] = &[
    Template {
        kind: PatternKind::InfiniteLoop,
        note: "loop condition variable is never updated in the body",
        bind: bind_infinite,
        vulnerable: r#"$counter = 0
while $counter < $limit:  @@
    print("$msg", $counter)
"#,
        clean: r#"$counter = 0
while $counter < $limit:
    print("$msg", $counter)
    $counter += 1
"#,
    },
    Template {
        kind: PatternKind::OffByOne,
        note: "range stops one short of the stated inclusive end",
        bind: bind_off_by_one,
        vulnerable: r#"# Intention: print numbers $lo to $hi
for $var in range($lo, $hi):  @@
    print($var)
"#,
        clean: r#"# Intention: print numbers $lo to $hi
for $var in range($lo, $hi_plus):
    print($var)
"#,
    },
    Template {
        kind: PatternKind::ControlFlowMisuse,
        note: "else clause is skipped because the loop always breaks",
        bind: bind_control_flow,
        vulnerable: r#"for $var in range($n):
    if $var == $stop:
        break
else:  @@
    print("$msg")
"#,
        clean: r#"$flag = False
for $var in range($n):
    if $var == $stop:
        $flag = True
        break
if not $flag:
    print("$msg")
"#,
    },
    Template {
        kind: PatternKind::LoopVarReassignment,
        note: "loop control variable is reassigned inside the body",
        bind: bind_reassign,
        vulnerable: r#"for $var in range($n):
    print($var)
    $var = $reset  @@
"#,
        clean: r#"for $var in range($n):
    print($var)
    $other = $var + $reset
    print($other)
"#,
    },
    Template {
        kind: PatternKind::DeadUnreachableCode,
        note: "else branch can never run for this constant range",
        bind: bind_dead_code,
        vulnerable: r#"for $var in range($n):
    if $var < $big:
        print("$msg_a")
    else:
        print("$msg_b")  @@
"#,
        clean: r#"for $var in range($n):
    if $var < $mid:
        print("$msg_a")
    else:
        print("$msg_b")
"#,
    },
    Template {
        kind: PatternKind::SensitiveDataLogging,
        note: "secret value printed in plain text",
        bind: bind_logging,
        vulnerable: r#"for $person in $group:
    $secret = $fetch($person)
    print(f"[DEBUG] $verb {$person} using {$secret}")  @@
"#,
        clean: r#"for $person in $group:
    $secret = $fetch($person)
    print(f"[DEBUG] $verb {$person}")
"#,
    },
    Template {
        kind: PatternKind::TimingSideChannel,
        note: "delay depends on the submitted username",
        bind: bind_timing,
        vulnerable: r#"for $attempt in $attempts:
    if $attempt["username"] == "$admin":
        time.sleep($delay)  @@
    $validate($attempt)
"#,
        clean: r#"for $attempt in $attempts:
    time.sleep($delay)
    $validate($attempt)
"#,
    },
    Template {
        kind: PatternKind::MissingAuthorization,
        note: "destructive request executed without an authorization check",
        bind: bind_authorization,
        vulnerable: r#"for $req in $requests:
    if $req["action"] == "$action":
        $destroy()  @@
"#,
        clean: r#"for $req in $requests:
    if $req["action"] == "$action" and $authz($req["user"]):
        $destroy()
"#,
    },
    Template {
        kind: PatternKind::InsecureEvalInjection,
        note: "eval on untrusted input",
        bind: bind_eval,
        vulnerable: r#"for $expr in $exprs:
    $result = eval($expr)  @@
    print($result)
"#,
        clean: r#"import ast

for $expr in $exprs:
    $result = ast.literal_eval($expr)
    print($result)
"#,
    },
    Template {
        kind: PatternKind::UnvalidatedLoopBound,
        note: "iteration count read from input without a limit",
        bind: bind_loop_bound,
        vulnerable: r#"for $var in range(int(input("$prompt"))):  @@
    $task()
"#,
        clean: r#"$cap = $capval
for $var in range(min(int(input("$prompt")), $cap)):
    $task()
"#,
    },
    Template {
        kind: PatternKind::ResourceExhaustion,
        note: "one file created per user-supplied name without a bound",
        bind: bind_exhaustion,
        vulnerable: r#"for $fname in $files:
    with open($fname, "$mode") as $fh:  @@
        $fh.write("X" * $size)
"#,
        clean: r#"$maxname = $maxval
for $fname in $files[:$maxname]:
    with open($fname, "$mode") as $fh:
        $fh.write("X" * $size)
"#,
    },
    Template {
        kind: PatternKind::UnencryptedSensitiveStorage,
        note: "sensitive field written to disk unencrypted",
        bind: bind_storage,
        vulnerable: r#"for $rec in $records:
    with open("$dump", "a") as $fh:
        $fh.write(f"{$rec['$field']},{$rec['name']}\n")  @@
"#,
        clean: r#"for $rec in $records:
    with open("$dump", "a") as $fh:
        $fh.write(f"{$protect($rec['$field'])},{$rec['name']}\n")
"#,
    },
    Template {
        kind: PatternKind::HardcodedSecret,
        note: "credential literal embedded in the loop",
        bind: bind_hardcoded,
        vulnerable: r#"for $person in $group:
    $secret = "$literal"  @@
    $authfn($person, $secret)
"#,
        clean: r#"import os

$secret = os.environ["$envvar"]
for $person in $group:
    $authfn($person, $secret)
"#,
    },
    Template {
        kind: PatternKind::UnsafeNetworkFileOp,
        note: "connection to an unvalidated host with no timeout",
        bind: bind_network,
        vulnerable: r#"for $host in $hosts:
    $sock = socket.socket()
    $sock.connect(($host, $port))  @@
    $sock.send(b"GET / HTTP/1.0\r\n\r\n")
    $sock.close()
"#,
        clean: r#"for $host in $hosts:
    if $host not in $allowlist:
        continue
    $sock = socket.socket()
    $sock.settimeout($timeout)
    $sock.connect(($host, $port))
    $sock.send(b"GET / HTTP/1.0\r\n\r\n")
    $sock.close()
"#,
    },
    Template {
        kind: PatternKind::MissingExceptionHandling,
        note: "an exception from one task aborts the whole loop",
        bind: bind_exceptions,
        vulnerable: r#"# loopscan: exception-prone
for $task in $tasks:
    $process($task)  @@
"#,
        clean: r#"# loopscan: exception-prone
for $task in $tasks:
    try:
        $process($task)
    except Exception as exc:
        $report($task, exc)
"#,
    },
    Template {
        kind: PatternKind::InvariantRecompute,
        note: "loop-invariant value recomputed every iteration",
        bind: bind_invariant,
        vulnerable: r#"$data = list(range($n))
for $i in range(len($data)):
    $hoist = len($data) ** $exp  @@
    $data[$i] += $hoist
"#,
        clean: r#"$data = list(range($n))
$hoist = len($data) ** $exp
for $i in range(len($data)):
    $data[$i] += $hoist
"#,
    },
    Template {
        kind: PatternKind::RedundantObjectCreation,
        note: "constant dict rebuilt on every iteration",
        bind: bind_object,
        vulnerable: r#"for _ in range($n):
    $obj = {"$k": "$val"}  @@
"#,
        clean: r#"$obj = {"$k": "$val"}
for _ in range($n):
    $consume($obj)
"#,
    },
    Template {
        kind: PatternKind::StringConcatInLoop,
        note: "string accumulator grown with +=",
        bind: bind_concat,
        vulnerable: r#"$acc = ""
for $i in range($n):
    $acc += str($i)  @@
"#,
        clean: r#"import io

$buf = io.StringIO()
for $i in range($n):
    $buf.write(str($i))
$acc = $buf.getvalue()
"#,
    },
    Template {
        kind: PatternKind::MissingLazyEvaluation,
        note: "large list materialized only to be summed",
        bind: bind_lazy,
        vulnerable: r#"for $batch in range($batches):
    $squares = [$x * $x for $x in range($big)]  @@
    print($batch, sum($squares))
"#,
        clean: r#"for $batch in range($batches):
    $squares = ($x * $x for $x in range($big))
    print($batch, sum($squares))
"#,
    },
    Template {
        kind: PatternKind::AvoidableNestedLoop,
        note: "quadratic duplicate scan",
        bind: bind_nested,
        vulnerable: r#"$nums = list(range($n)) + [$dup]
$dups = []
for $i in range(len($nums)):
    for $j in range($i + 1, len($nums)):  @@
        if $nums[$i] == $nums[$j]:
            $dups.append($nums[$i])
"#,
        clean: r#"$nums = list(range($n)) + [$dup]
$seen = set()
$dups = []
for $x in $nums:
    if $x in $seen:
        $dups.append($x)
    $seen.add($x)
"#,
    },
    Template {
        kind: PatternKind::InefficientMembershipCheck,
        note: "membership test against a list",
        bind: bind_membership,
        vulnerable: r#"$items = list(range($n))
$targets = list(range($m))
for $t in $targets:
    if $t in $items:  @@
        print($t)
"#,
        clean: r#"$items = set(range($n))
$targets = list(range($m))
for $t in $targets:
    if $t in $items:
        print($t)
"#,
    },
    Template {
        kind: PatternKind::MissingBuiltinComprehension,
        note: "manual append loop instead of a comprehension",
        bind: bind_builtin,
        vulnerable: r#"$nums = list(range($n))
$out = []
for $x in $nums:
    $out.append($x * $factor)  @@
"#,
        clean: r#"$nums = list(range($n))
$out = [$x * $factor for $x in $nums]
for $y in $out:
    print($y)
"#,
    },
    Template {
        kind: PatternKind::RedundantIOInLoop,
        note: "one disk write per iteration",
        bind: bind_io,
        vulnerable: r#"with open("$path", "w") as $fh:
    for $i in range($n):
        $fh.write(f"Line {$i}\n")  @@
"#,
        clean: r#"import io

$buf = io.StringIO()
for $i in range($n):
    $buf.write(f"Line {$i}\n")
with open("$path", "w") as $fh:
    $fh.write($buf.getvalue())
"#,
    },
    Template {
        kind: PatternKind::UnusedAccumulation,
        note: "large list of results is never used",
        bind: bind_unused,
        vulnerable: r#"$results = []
for $i in range($big):
    $results.append($i * $i)  @@
"#,
        clean: r#"$total = 0
for $i in range($big):
    $total += $i * $i
print($total)
"#,
    },
    Template {
        kind: PatternKind::RangeLenAntipattern,
        note: "index loop over parallel lists instead of zip",
        bind: bind_range_len,
        vulnerable: r#"$names = ["$a", "$b", "$c"]
$ages = [$x, $y, $z]
for $i in range(len($names)):  @@
    print($names[$i], $ages[$i])
"#,
        clean: r#"$names = ["$a", "$b", "$c"]
$ages = [$x, $y, $z]
for $name, $age in zip($names, $ages):
    print($name, $age)
"#,
    },
];

/// Strips `@@` markers, returning the source and the marked line numbers.
fn strip_markers(text: &str) -> (String, Vec<usize>) {
    let mut lines = Vec::new();
    let mut marked = Vec::new();
    for (i, line) in text.lines().enumerate() {
        match line.trim_end().strip_suffix(MARKER) {
            Some(rest) => {
                marked.push(i + 1);
                lines.push(rest.trim_end().to_string());
            }
            None => lines.push(line.to_string()),
        }
    }
    let mut source = lines.join("\n");
    source.push('\n');
    (source, marked)
}

fn kind_seed(seed: u64, kind: PatternKind) -> u64 {
    let index = PatternKind::ALL.iter().position(|k| *k == kind).expect("kind is catalogued") as u64;
    seed ^ (index + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Emits a vulnerable and a clean sample for every kind of the selected
/// categories, in catalog order. Same inputs give identical output.
pub fn generate_seed_corpus(categories: &BTreeSet<Category>, seed: u64) -> Vec<CodeSample> {
    let mut samples = Vec::new();
    for template in TEMPLATES.iter().filter(|t| categories.contains(&t.kind.category())) {
        let mut vars = Vars {
            rng: ChaCha8Rng::seed_from_u64(kind_seed(seed, template.kind)),
            values: HashMap::new(),
            used: HashSet::new(),
        };
        (template.bind)(&mut vars);

        let id = template.kind.id();
        let (source, marked) = strip_markers(&vars.render(template.vulnerable));
        let mut vulnerable = CodeSample::new(format!("{id}_vulnerable"), source);
        vulnerable.annotations = marked
            .into_iter()
            .map(|line| GroundTruthAnnotation {
                sample_id: vulnerable.sample_id.clone(),
                line_start: line,
                line_end: line,
                category: template.kind.category(),
                kind: template.kind,
                note: template.note.to_string(),
            })
            .collect();
        samples.push(vulnerable);

        let (source, marked) = strip_markers(&vars.render(template.clean));
        debug_assert!(marked.is_empty(), "clean template for {id} carries a marker");
        samples.push(CodeSample::new(format!("{id}_clean"), source));
    }
    samples
}
