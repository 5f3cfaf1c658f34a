pub mod wfst;
pub mod lexicon;
pub mod altgen;
pub mod metrics;
pub mod seeding;
pub mod corpus;
pub mod neural;
pub mod training;
pub mod synthetic;
pub mod cli;
