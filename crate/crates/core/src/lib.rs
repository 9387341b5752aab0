//! Reachability games on graphs, dynamic hypergames that model an opponent's
//! growing knowledge of P1's actions, and deceptive almost-sure winning
//! strategies that exploit that misperception.

pub mod asw;
pub mod corpus;
pub mod game;
pub mod hypergame;
pub mod inference;
pub mod dasw;
pub mod oracle;
pub mod simulator;
pub mod gridworld;
pub mod io;
pub mod cli;
