use d2d::robots::*;

fn msgs(states: &[RobotState]) -> Vec<Message> {
    states.iter().map(RobotState::message).collect()
}

fn view(degree: usize, entered: Option<usize>) -> LocalView {
    LocalView { degree, entered }
}

fn settled_at_home(id: RobotId, parent: Option<usize>) -> RobotState {
    let mut s = RobotState::new(id);
    s.settled = true;
    s.special = 0;
    s.parent = parent;
    s
}

#[test]
fn branch_table() {
    let mut s = RobotState::new(1);
    assert_eq!(Branch::of(&s).unwrap(), Branch::Unsettled);
    s.settled = true;
    assert_eq!(Branch::of(&s).unwrap(), Branch::SettledStage1);
    s.act_settled = true;
    assert_eq!(Branch::of(&s).unwrap(), Branch::ActSettled);
    s.act_settled = false;
    s.terminate = true;
    assert!(matches!(Branch::of(&s), Err(ProtocolError::UnreachableState { .. })));
    s.role = LastRole::Walk;
    assert_eq!(Branch::of(&s).unwrap(), Branch::LastRobot);
    let mut odd = RobotState::new(2);
    odd.act_settled = true;
    assert!(Branch::of(&odd).is_err());
}

#[test]
fn phase_zero_settles_minimum() {
    let mut states: Vec<RobotState> = (1..=4).map(RobotState::new).collect();
    let m = msgs(&states);
    let mut labels = Vec::new();
    for s in &mut states {
        let d = step_unsettled(s, Inbox::new(&m, s.id), view(3, None), &Params::default()).unwrap();
        labels.push(d.label());
    }
    assert_eq!(labels, ["settle+accompany:0", "explore:0", "explore:0", "explore:0"]);
    assert!(states[0].settled && states[0].parent.is_none() && states[0].special == 1);
    assert!(states[1..].iter().all(|s| !s.settled && s.dist == 1 && s.special == -1 && s.phi == 3));
}

#[test]
fn lone_robot_settles_and_terminates() {
    let mut s = RobotState::new(5);
    let m = msgs(std::slice::from_ref(&s));
    let d = step_unsettled(&mut s, Inbox::new(&m, 5), view(4, None), &Params::default()).unwrap();
    assert_eq!(d.label(), "settle+terminate");
    assert!(s.terminate && s.halted && s.act_settled);
}

/// Two group robots arrive at a dist-2 node of degree 2 through port 1.
fn dist_two_group() -> Vec<RobotState> {
    [2, 3]
        .map(|id| {
            let mut s = RobotState::new(id);
            s.portentered = Some(0);
            s.dist = 2;
            s.phi = 2;
            s
        })
        .to_vec()
}

fn run_wait(group: &mut [RobotState], visitor: Option<RobotState>) -> Vec<Decision> {
    let mut out = Vec::new();
    for round in 0..4 {
        let mut present: Vec<RobotState> = group.to_vec();
        if round == 1 {
            present.extend(visitor.clone());
        }
        let m = msgs(&present);
        let entered = if round == 0 { Some(1) } else { None };
        out = group
            .iter_mut()
            .map(|s| step_unsettled(s, Inbox::new(&m, s.id), view(2, entered), &Params::default()).unwrap())
            .collect();
        if round < 3 {
            assert!(out.iter().all(|d| d.is_quiet()), "acted before the 2φ wait ended");
        }
    }
    out
}

#[test]
fn dist_two_without_visitors_settles_lowest() {
    let mut group = dist_two_group();
    let d = run_wait(&mut group, None);
    assert_eq!(d[0].label(), "settle+accompany:0");
    assert_eq!(group[0].parent, Some(1));
    assert_eq!(group[0].special, 1);
    assert_eq!(group[0].count, 1);
    assert_eq!(d[1].label(), "explore:0");
    assert_eq!(group[1].dist, 1);
}

#[test]
fn dist_two_with_visitor_backtracks() {
    let mut visitor = settled_at_home(1, None);
    visitor.dist = 1;
    let mut group = dist_two_group();
    let d = run_wait(&mut group, Some(visitor));
    assert!(d.iter().all(|d| d.label() == "backtrack:1"));
    assert!(group.iter().all(|s| s.state == Travel::Backtrack && !s.settled));
}

#[test]
fn last_of_group_starts_walk() {
    let mut group = dist_two_group();
    group.truncate(1);
    let d = run_wait(&mut group, None);
    assert_eq!(d[0].label(), "settle+last+walk:1");
    let s = &group[0];
    assert!(s.terminate && s.stage == 2 && s.role == LastRole::Walk);
}

#[test]
fn oscillation_visits_every_port() {
    let mut s = settled_at_home(1, Some(1));
    let mut ports = Vec::new();
    let mut entered = None;
    for _ in 0..6 {
        let m = msgs(std::slice::from_ref(&s));
        let d = step_settled_stage1(&mut s, Inbox::new(&m, 1), view(2, entered), &Params::default()).unwrap();
        let p = d.port().expect("a lone settled robot keeps moving");
        ports.push(p);
        // Neighbors are entered through their port 0; home through the port used to leave.
        entered = Some(if s.osc.homeward { s.osc.out.unwrap() } else { 0 });
    }
    assert_eq!(ports, vec![0, 0, 1, 0, 0, 0]);
}

#[test]
fn message_shows_parent_only_at_home() {
    let mut s = settled_at_home(4, Some(2));
    assert_eq!(s.message().parent, Some(2));
    s.dist = 1;
    assert_eq!(s.message().parent, None);
    let unsettled = RobotState::new(9);
    assert_eq!(unsettled.message().parent, None);
    assert!(unsettled.message().is_unsettled());
}

#[test]
fn act_settled_terminates_when_counts_match() {
    let mut s = settled_at_home(3, Some(0));
    s.act_settled = true;
    s.stage = 2;
    s.count = 2;
    s.count_prime = 2;
    let m = msgs(std::slice::from_ref(&s));
    let d = step_act_settled(&mut s, Inbox::new(&m, 3), view(2, None), &Params::default()).unwrap();
    assert_eq!(d.label(), "terminate");
    assert!(s.halted);
}

#[test]
fn count_prime_overshoot_is_fatal() {
    let mut s = settled_at_home(3, Some(0));
    s.act_settled = true;
    s.stage = 2;
    let mut rl = settled_at_home(7, Some(1));
    rl.terminate = true;
    rl.stage = 2;
    rl.role = LastRole::Replay;
    rl.dist = 1;
    rl.wait_remaining = 3;
    let m = msgs(&[s.clone(), rl]);
    let err = step_act_settled(&mut s, Inbox::new(&m, 3), view(2, None), &Params::default()).unwrap_err();
    assert!(matches!(err, ProtocolError::CountOvershoot { count: 0, count_prime: 1, .. }));
}

#[test]
fn strategy_names() {
    assert_eq!("main".parse::<Strategy>().unwrap(), Strategy::Main);
    assert_eq!("warmup".parse::<Strategy>().unwrap(), Strategy::Warmup);
    assert!("fast".parse::<Strategy>().is_err());
    assert_eq!(Strategy::Warmup.to_string(), "warmup");
}

#[test]
fn warmup_settler_gets_a_table() {
    let mut states: Vec<RobotState> = (1..=2).map(RobotState::new).collect();
    let m = msgs(&states);
    let params = Params { known_delta: 3, fault: None };
    for s in &mut states {
        step_warmup(s, Inbox::new(&m, s.id), view(3, None), &params).unwrap();
    }
    assert!(states[0].settled);
    assert_eq!(states[0].table.len(), 3);
    assert!(!states[1].settled);
}
