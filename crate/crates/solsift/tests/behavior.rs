//! Behavioral checks on realistic contract shapes: the filter stack should
//! clear the classic benign patterns and keep the classic exploitable ones.

use solsift::detect::VulnClass;
use solsift::model::build_model;
use solsift::parser::parse;
use solsift::patterns::{classify_all, ClassifyOptions, Outcome, PatternId, Verdict};

fn verdicts(src: &str, classes: &[VulnClass]) -> Vec<Verdict> {
    let mut out = Vec::new();
    for m in build_model(&parse(src), "case.sol") {
        out.extend(classify_all(&m, classes, &ClassifyOptions::default()));
    }
    out
}

#[test]
fn timestamp_randomness_lottery_stays_suspicious() {
    let src = r#"
contract Lottery {
    uint pot;
    function() external payable {
        pot += msg.value;
        uint roll = uint(keccak256(abi.encodePacked(now, msg.sender))) % 100;
        if (roll == 7) {
            msg.sender.transfer(pot);
            pot = 0;
        }
    }
}
"#;
    let v = verdicts(src, &[VulnClass::Td]);
    let roll_line = v.iter().find(|x| x.candidate.line() == 6).unwrap();
    assert_eq!(roll_line.outcome, Outcome::LikelyTP);
    assert!(roll_line
        .justification
        .iter()
        .any(|j| j.contains("randomness seed")));
}

#[test]
fn vesting_interval_checks_are_cleared() {
    let src = r#"
contract Vesting {
    address beneficiary;
    uint cliff;
    uint deadline;
    function Vesting(address who) {
        beneficiary = who;
        cliff = now + 30 days;
        deadline = now + 90 days;
    }
    function claim() public {
        require(now >= cliff);
        require(now <= deadline);
        beneficiary.transfer(address(this).balance);
    }
}
"#;
    let v = verdicts(src, &[VulnClass::Td]);
    // both requires compare against state variables: cleared as interval
    // verification
    for line in [12, 13] {
        let verdict = v.iter().find(|x| x.candidate.line() == line).unwrap();
        assert_eq!(verdict.outcome, Outcome::FlaggedFP, "line {line}");
        assert!(verdict
            .matched_patterns
            .contains(&PatternId::Td1IntervalCheck));
    }
    // the constructor stores now+offset into state read only by those
    // comparisons, so the stores are cleared too
    for line in [8, 9] {
        let verdict = v.iter().find(|x| x.candidate.line() == line).unwrap();
        assert_eq!(verdict.outcome, Outcome::FlaggedFP, "line {line}");
    }
}

#[test]
fn checks_effects_interactions_withdrawal_is_cleared_by_ree5() {
    let src = r#"
contract Vault {
    mapping(address => uint) balances;
    function deposit() public payable { balances[msg.sender] += msg.value; }
    function withdraw() public {
        uint amount = balances[msg.sender];
        balances[msg.sender] = 0;
        msg.sender.call{value: amount}("");
    }
}
"#;
    let v = verdicts(src, &[VulnClass::Ree]);
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].outcome, Outcome::FlaggedFP);
    assert!(v[0]
        .matched_patterns
        .contains(&PatternId::Ree5NoStateChangeAfter));
}

#[test]
fn state_write_after_call_stays_suspicious() {
    let src = r#"
contract Vault {
    mapping(address => uint) balances;
    function withdraw() public {
        uint amount = balances[msg.sender];
        msg.sender.call{value: amount}("");
        balances[msg.sender] = 0;
    }
}
"#;
    let v = verdicts(src, &[VulnClass::Ree]);
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].outcome, Outcome::LikelyTP);
}

#[test]
fn airdrop_loop_sends_stay_suspicious_for_urv() {
    let src = r#"
contract Airdrop {
    address[] recipients;
    bool sent;
    function drop(uint amount) public {
        for (uint i = 0; i < recipients.length; i++) {
            recipients[i].send(amount);
        }
        sent = true;
    }
}
"#;
    let v = verdicts(src, &[VulnClass::Urv]);
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].outcome, Outcome::LikelyTP);
}

#[test]
fn owner_gated_sweeper_is_cleared_by_modifier() {
    let src = r#"
contract Sweeper {
    address owner;
    uint swept;
    modifier onlyOwner() { require(msg.sender == owner); _; }
    function Sweeper() { owner = msg.sender; }
    function sweep(address to) public onlyOwner {
        to.send(address(this).balance);
        swept = now;
    }
}
"#;
    let v = verdicts(src, &[VulnClass::Urv]);
    assert_eq!(v.len(), 1);
    assert_eq!(v[0].outcome, Outcome::FlaggedFP);
    assert!(v[0]
        .matched_patterns
        .contains(&PatternId::Urv2RestrictiveModifier));
    // and the timestamp store into `swept` is cleared: the value is never
    // read anywhere
    let td = verdicts(src, &[VulnClass::Td]);
    assert_eq!(td.len(), 1);
    assert_eq!(td[0].outcome, Outcome::FlaggedFP);
}
