//! Small worked instances used in tests, docs and the CLI smoke tests.

/// Three A vertices competing for two B vertices; no feasible matching
/// exists and the critical deficiency is 1.
pub const FIG1: &str = "\
A a1 1 2
A a2 2 2
A a3 1 1
B b1 0 1
B b2 1 2
PREF a1 b1 b2
PREF a2 b1 b2
PREF a3 b2
PREF b1 a1 a2
PREF b2 a3 a1 a2
";

/// Instance where both A and B have many-to-many quotas and a feasible
/// matching exists.
pub const FIG4: &str = "\
A a1 3 3
A a2 2 3
A a3 0 1
A a4 0 1
B b1 1 3
B b2 1 2
B b3 0 1
B b4 0 1
PREF a1 b1 b3 b2
PREF a2 b2 b1 b3
PREF a3 b2
PREF a4 b4 b1
PREF b1 a1 a2 a4
PREF b2 a3 a2 a1
PREF b3 a1 a2
PREF b4 a4
";

/// Six unit-capacity A vertices and one B vertex with capacity three.
pub const VOTING: &str = "\
A a1 0 1
A a2 0 1
A a3 0 1
A a4 0 1
A a5 0 1
A a6 0 1
B b 0 3
PREF a1 b
PREF a2 b
PREF a3 b
PREF a4 b
PREF a5 b
PREF a6 b
PREF b a1 a2 a3 a4 a5 a6
";
