use thiserror::Error;

/// Errors raised by the computation pipeline.
///
/// Each variant maps onto one of the CLI exit codes, see [`Error::exit_code`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("usage: {0}")]
    Usage(String),

    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("enumeration budget exceeded: {needed} candidates needed, budget is {budget}{}", .context.as_ref().map(|c| format!(" ({c})")).unwrap_or_default())]
    Budget {
        needed: u128,
        budget: u64,
        context: Option<String>,
    },

    #[error("no rational function within bounds (dn<={dn_max}, dd<={dd_max}) matches the series: {context}")]
    NoMatch {
        dn_max: usize,
        dd_max: usize,
        context: String,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub fn parse(line: usize, col: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Parse { .. } | Error::Input(_) => 2,
            Error::Budget { .. } => 3,
            Error::NoMatch { .. } => 4,
            Error::Invariant(_) => 5,
        }
    }

    pub(crate) fn with_context(self, ctx: impl Into<String>) -> Self {
        match self {
            Error::Budget {
                needed,
                budget,
                context,
            } => {
                let ctx = ctx.into();
                Error::Budget {
                    needed,
                    budget,
                    context: Some(match context {
                        Some(c) => format!("{ctx}: {c}"),
                        None => ctx,
                    }),
                }
            }
            Error::NoMatch {
                dn_max,
                dd_max,
                context,
            } => Error::NoMatch {
                dn_max,
                dd_max,
                context: if context.is_empty() {
                    ctx.into()
                } else {
                    format!("{}: {context}", ctx.into())
                },
            },
            Error::Invariant(m) => Error::Invariant(format!("{}: {m}", ctx.into())),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
