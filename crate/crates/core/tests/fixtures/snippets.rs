//! The 25 canonical loop-pattern snippets with their expected finding line
//! and a corrected counterpart that must not trigger the pattern.

#![allow(dead_code)]

use loopscan::corpus::PatternKind;

pub struct Snippet {
    pub kind: PatternKind,
    pub source: &'static str,
    pub line: usize,
    pub clean: &'static str,
}

pub const SNIPPETS: &[Snippet] = &[
    Snippet {
        kind: PatternKind::InfiniteLoop,
        source: r#"i = 0
while i < 5:
    print("This will print forever")# Missing `i += 1` causes infinite loop
"#,
        line: 2,
        clean: r#"i = 0
while i < 5:
    print("This will print 0 through 4")
    i += 1
"#,
    },
    Snippet {
        kind: PatternKind::OffByOne,
        source: r#"# Intention: print numbers 1 to 5
for i in range(1, 6):  # Correct: range(1, 6) prints 1 through 5
    print(i)

# Off-by-one mistake: this will miss printing 5
for i in range(1, 5):
    print(i)  # Prints only 1 to 4
"#,
        line: 6,
        clean: r#"# Intention: print numbers 1 to 5
for i in range(1, 6):  # Correct: range(1, 6) prints 1 through 5
    print(i)
"#,
    },
    Snippet {
        kind: PatternKind::ControlFlowMisuse,
        source: r#"# Misuse of `else` with `break`
for i in range(5):
    if i == 3:
        break
else:
    print("Loop completed without break")  # This will NOT run due to `break`
"#,
        line: 5,
        clean: r#"found = False
for i in range(5):
    if i == 3:
        found = True
        break
if not found:
    print("Loop completed without break")
"#,
    },
    Snippet {
        kind: PatternKind::LoopVarReassignment,
        source: r#"# Resetting of control variable inside the loop unintentionally
for i in range(5):
    print(i)
    i = 0  # Reinitialization of loop control variable
"#,
        line: 4,
        clean: r#"for i in range(5):
    print(i)
"#,
    },
    Snippet {
        kind: PatternKind::DeadUnreachableCode,
        source: r#"for i in range(5):
    if i < 10:
        print("always true")  # Redundant check
    else:
        print("never reached")  # Unreachable branch
"#,
        line: 5,
        clean: r#"for i in range(5):
    if i < 3:
        print("small")
    else:
        print("large")
"#,
    },
    Snippet {
        kind: PatternKind::SensitiveDataLogging,
        source: r#"for user in users:
    password = get_password(user)
    print(f"[DEBUG] Authenticating {user} using password: {password}")  #  Example of sensitive data leakage
"#,
        line: 3,
        clean: r#"for user in users:
    password = get_password(user)
    print(f"[DEBUG] Authenticating {user}")
"#,
    },
    Snippet {
        kind: PatternKind::TimingSideChannel,
        source: r#"for attempt in login_attempts:
    if attempt["username"] == "admin":
        time.sleep(0.5)  # Delay based on value = admin
    validate_login(attempt)
"#,
        line: 3,
        clean: r#"for attempt in login_attempts:
    time.sleep(0.5)  # Constant delay for every attempt
    validate_login(attempt)
"#,
    },
    Snippet {
        kind: PatternKind::MissingAuthorization,
        source: r#"for request in incoming_requests:
    if request["action"] == "delete_all":
        delete_all_data()  # No authorization check before executing request
"#,
        line: 3,
        clean: r#"for request in incoming_requests:
    if request["action"] == "delete_all" and is_admin(request["user"]):
        delete_all_data()
"#,
    },
    Snippet {
        kind: PatternKind::InsecureEvalInjection,
        source: r#"for expr in user_submitted_code:
    result = eval(expr)  # Arbitrary code execution
    print(result)
"#,
        line: 2,
        clean: r#"for expr in user_submitted_code:
    result = ast.literal_eval(expr)
    print(result)
"#,
    },
    Snippet {
        kind: PatternKind::UnvalidatedLoopBound,
        source: r#"for i in range(int(input("How many iterations? "))):  # Unchecked input could crash system
    perform_task()
"#,
        line: 1,
        clean: r#"MAX_ITERATIONS = 100
for i in range(min(int(input("How many iterations? ")), MAX_ITERATIONS)):
    perform_task()
"#,
    },
    Snippet {
        kind: PatternKind::ResourceExhaustion,
        source: r#"for filename in user_supplied_filenames:
    with open(filename, "w") as f:  # Mass file creation = DoS risk
        f.write("X" * 1000000)
"#,
        line: 2,
        clean: r#"MAX_FILES = 10
for filename in user_supplied_filenames[:MAX_FILES]:
    with open(filename, "w") as f:
        f.write("X" * 1000)
"#,
    },
    Snippet {
        kind: PatternKind::UnencryptedSensitiveStorage,
        source: r#"for record in sensitive_records:
    with open("temp_dump.txt", "a") as f:  # Storing unencrypted PII
        f.write(f"{record['ssn']},{record['name']}\n")
"#,
        line: 3,
        clean: r#"for record in sensitive_records:
    with open("temp_dump.txt", "a") as f:
        f.write(f"{encrypt(record['ssn'])},{record['name']}\n")
"#,
    },
    Snippet {
        kind: PatternKind::HardcodedSecret,
        source: r#"for user in users:
    token = "HARDCODED_SECRET_12345"  # Never hardcode in loop or anywhere
    authenticate(user, token)
"#,
        line: 2,
        clean: r#"token = os.environ["API_TOKEN"]
for user in users:
    authenticate(user, token)
"#,
    },
    Snippet {
        kind: PatternKind::UnsafeNetworkFileOp,
        source: r#"for host in user_input_hosts:
    s = socket.socket()
    s.connect((host, 80))  # No validation or timeout
    s.send(b"GET / HTTP/1.0\r\n\r\n")
    s.close()
"#,
        line: 3,
        clean: r#"for host in user_input_hosts:
    if host not in ALLOWED_HOSTS:
        continue
    s = socket.socket()
    s.settimeout(5)
    s.connect((host, 80))
    s.send(b"GET / HTTP/1.0\r\n\r\n")
    s.close()
"#,
    },
    Snippet {
        kind: PatternKind::MissingExceptionHandling,
        source: r#"for task in tasks:
    process(task)  # Exception thrown by this function will  crash the loop because of a lack of try/except
"#,
        line: 2,
        clean: r#"for task in tasks:
    try:
        process(task)
    except Exception as exc:
        log_failure(task, exc)
"#,
    },
    Snippet {
        kind: PatternKind::InvariantRecompute,
        source: r#"data = list(range(10000))
for i in range(len(data)):
    sqrt_len = len(data)**0.5  # Recomputed in every iteration (inefficient)
    data[i] += sqrt_len
"#,
        line: 3,
        clean: r#"data = list(range(10000))
sqrt_len = len(data)**0.5
for i in range(len(data)):
    data[i] += sqrt_len
"#,
    },
    Snippet {
        kind: PatternKind::RedundantObjectCreation,
        source: r#"for _ in range(10000):
    temp = {"key": "value"}  # New dict unnecessarily created every time
"#,
        line: 2,
        clean: r#"temp = {"key": "value"}
for _ in range(10000):
    use(temp)
"#,
    },
    Snippet {
        kind: PatternKind::StringConcatInLoop,
        source: r#"result = ""
for i in range(1000):
    result += str(i)  # Inefficient due to string immutability
"#,
        line: 3,
        clean: r#"buffer = io.StringIO()
for i in range(1000):
    buffer.write(str(i))
result = buffer.getvalue()
"#,
    },
    Snippet {
        kind: PatternKind::MissingLazyEvaluation,
        source: r#"# Consumes a lot of memory unnecessarily
squares = [x*x for x in range(10**6)]  # All values stored in memory
"#,
        line: 2,
        clean: r#"squares = (x*x for x in range(10**6))
for sq in squares:
    print(sq)
"#,
    },
    Snippet {
        kind: PatternKind::AvoidableNestedLoop,
        source: r#"nums = list(range(1000)) + [999]
duplicates = []
for i in range(len(nums)):
    for j in range(i+1, len(nums)):
        if nums[i] == nums[j]:
            duplicates.append(nums[i])
"#,
        line: 4,
        clean: r#"nums = list(range(1000)) + [999]
seen = set()
duplicates = []
for n in nums:
    if n in seen:
        duplicates.append(n)
    seen.add(n)
"#,
    },
    Snippet {
        kind: PatternKind::InefficientMembershipCheck,
        source: r#"items = list(range(10000))
search_targets = list(range(5000))
for target in search_targets:
    if target in items:
        pass  # O(n) lookup instead of O(1)
"#,
        line: 4,
        clean: r#"items = set(range(10000))
search_targets = list(range(5000))
for target in search_targets:
    if target in items:
        pass
"#,
    },
    Snippet {
        kind: PatternKind::MissingBuiltinComprehension,
        source: r#"nums = list(range(1000))
squares = []
for n in nums:
    squares.append(n * n)  # Could use list comprehension
"#,
        line: 4,
        clean: r#"nums = list(range(1000))
squares = [n * n for n in nums]
for sq in squares:
    print(sq)
"#,
    },
    Snippet {
        kind: PatternKind::RedundantIOInLoop,
        source: r#"with open("output.txt", "w") as f:
    for i in range(1000):
        f.write(f"Line {i}\n")  # Inefficient due to frequent disk writes
"#,
        line: 3,
        clean: r#"buffer = io.StringIO()
for i in range(1000):
    buffer.write(f"Line {i}\n")
with open("output.txt", "w") as f:
    f.write(buffer.getvalue())
"#,
    },
    Snippet {
        kind: PatternKind::UnusedAccumulation,
        source: r#"results = []
for i in range(1000000):
    results.append(i * i)  # Accumulates all results in memory even if not used
"#,
        line: 3,
        clean: r#"total = 0
for i in range(1000000):
    total += i * i
print(total)
"#,
    },
    Snippet {
        kind: PatternKind::RangeLenAntipattern,
        source: r#"names = ["Alice", "Bob", "Charlie"]
ages = [25, 30, 35]
# Less readable and more error-prone
for i in range(len(names)):
    print(names[i], ages[i])  # Better with zip
"#,
        line: 4,
        clean: r#"names = ["Alice", "Bob", "Charlie"]
ages = [25, 30, 35]
for name, age in zip(names, ages):
    print(name, age)
"#,
    },
];

/// Rule configuration for one snippet. Exception handling is an opt-in
/// rule, so it is switched on only for its own snippet.
pub fn snippet_config(kind: PatternKind) -> loopscan::detectors::DetectorConfig {
    loopscan::detectors::DetectorConfig {
        exception_prone: kind == PatternKind::MissingExceptionHandling,
        ..Default::default()
    }
}
