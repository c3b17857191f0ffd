use std::collections::VecDeque;

use crate::protocols::PartySequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Dealer,
    Agent,
    Sender,
    Receiver,
    Observer,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Value(u8),
    PositionList { value: u8, positions: Vec<usize>, relayed: bool },
    Announcement(String),
    TestDisclosure { round: usize, value: u8 },
    Declaration(u8),
}

impl Payload {
    pub fn summary(&self) -> String {
        match self {
            Payload::Value(v) => format!("value={v}"),
            Payload::PositionList { value, positions, relayed } => {
                format!("{}list value={value} len={}", if *relayed { "relayed " } else { "" }, positions.len())
            }
            Payload::Announcement(s) => s.clone(),
            Payload::TestDisclosure { round, value } => format!("test round={round} value={value}"),
            Payload::Declaration(v) => format!("declare {v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelMessage {
    pub from: usize,
    pub to: usize,
    pub round: usize,
    pub payload: Payload,
}

/// A party: its private sequence and whatever it has received.
#[derive(Debug, Clone)]
pub struct PartyNode {
    pub id: usize,
    pub role: Role,
    sequence: Option<PartySequence>,
    received: Vec<ChannelMessage>,
    published: bool,
}

impl PartyNode {
    pub fn new(id: usize, role: Role) -> Self {
        PartyNode { id, role, sequence: None, received: Vec::new(), published: false }
    }

    pub fn hold(&mut self, seq: PartySequence) {
        assert_eq!(seq.party, self.id, "a node only ever holds its own sequence");
        self.sequence = Some(seq);
    }

    pub fn sequence(&self) -> Option<&PartySequence> {
        self.sequence.as_ref()
    }

    pub fn publish(&mut self) -> Option<&PartySequence> {
        self.published = true;
        self.sequence.as_ref()
    }

    pub fn is_published(&self) -> bool {
        self.published
    }

    pub fn received(&self) -> &[ChannelMessage] {
        &self.received
    }
}

/// Pairwise authenticated channels, delivered in send order.
#[derive(Debug, Default)]
pub struct MessageBus {
    queues: Vec<VecDeque<ChannelMessage>>,
    delivered: usize,
}

impl MessageBus {
    pub fn new(parties: usize) -> Self {
        MessageBus { queues: vec![VecDeque::new(); parties], delivered: 0 }
    }

    pub fn send(&mut self, msg: ChannelMessage) {
        assert!(msg.from != msg.to, "no self-addressed messages");
        self.queues[msg.to].push_back(msg);
    }

    /// Moves every pending message for `node` into its inbox.
    pub fn deliver_to(&mut self, node: &mut PartyNode) -> usize {
        let queue = &mut self.queues[node.id];
        let count = queue.len();
        for msg in queue.drain(..) {
            assert_eq!(msg.to, node.id, "message delivered off its channel");
            node.received.push(msg);
        }
        self.delivered += count;
        count
    }

    pub fn pending(&self) -> usize {
        self.queues.iter().map(VecDeque::len).sum()
    }

    pub fn delivered(&self) -> usize {
        self.delivered
    }
}
