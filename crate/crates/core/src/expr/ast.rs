use std::fmt;

/// Built-in single-argument functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sqrt,
    Sin,
    Cos,
    Atan,
}

impl Func {
    pub const ALL: [Func; 6] = [Func::Exp, Func::Ln, Func::Sqrt, Func::Sin, Func::Cos, Func::Atan];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Atan => "atan",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// Expression tree node.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    /// The declared free variable.
    Var,
    /// Any other identifier, resolved in a [`ParamEnv`](super::ParamEnv) at evaluation time.
    Param(String),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    pub fn binary(op: BinOp, lhs: Node, rhs: Node) -> Node {
        Node::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn call(f: Func, arg: Node) -> Node {
        Node::Call(f, Box::new(arg))
    }

    pub fn neg(arg: Node) -> Node {
        Node::Neg(Box::new(arg))
    }

    /// Whether the variable occurs anywhere below this node.
    pub fn contains_var(&self) -> bool {
        match self {
            Node::Var => true,
            Node::Num(_) | Node::Param(_) => false,
            Node::Neg(a) | Node::Call(_, a) => a.contains_var(),
            Node::Binary(_, a, b) => a.contains_var() || b.contains_var(),
        }
    }

    /// Number of nodes on the longest root-to-leaf path.
    pub fn depth(&self) -> usize {
        match self {
            Node::Num(_) | Node::Var | Node::Param(_) => 1,
            Node::Neg(a) | Node::Call(_, a) => 1 + a.depth(),
            Node::Binary(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub(crate) fn collect_params<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Node::Param(name) => {
                if !out.contains(&name.as_str()) {
                    out.push(name);
                }
            }
            Node::Num(_) | Node::Var => {}
            Node::Neg(a) | Node::Call(_, a) => a.collect_params(out),
            Node::Binary(_, a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
        }
    }

    /// Render fully parenthesised; `var` is printed for [`Node::Var`].
    pub fn render(&self, var: &str) -> String {
        let mut s = String::new();
        self.write_to(&mut s, var);
        s
    }

    fn write_to(&self, out: &mut String, var: &str) {
        match self {
            // Debug formatting of f64 is the shortest round-trip representation
            Node::Num(v) if v.is_sign_negative() => out.push_str(&format!("({v:?})")),
            Node::Num(v) => out.push_str(&format!("{v:?}")),
            Node::Var => out.push_str(var),
            Node::Param(p) => out.push_str(p),
            Node::Neg(a) => {
                out.push_str("(-");
                a.write_to(out, var);
                out.push(')');
            }
            Node::Binary(op, a, b) => {
                out.push('(');
                a.write_to(out, var);
                out.push(op.symbol());
                b.write_to(out, var);
                out.push(')');
            }
            Node::Call(f, a) => {
                out.push_str(f.name());
                out.push('(');
                a.write_to(out, var);
                out.push(')');
            }
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("x"))
    }
}
