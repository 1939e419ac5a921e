use hs2s_web::Demo;

#[test]
fn demo_operations() {
    let mut d = Demo::new(3).unwrap();
    assert!(d.complete("walk", 0).is_err());
    assert_eq!(d.train(20).unwrap().len(), 20);
    let c = d.complete("sit", 2).unwrap();
    assert_eq!(c["prefix_len"], 10);
    assert_eq!(c["completion"].as_array().unwrap().len(), 20);
    assert_eq!(c["truth"].as_array().unwrap().len(), 20);
    assert_eq!(c["zero_velocity"][19], c["zero_velocity"][9]);
    assert_eq!(c["completion"][0].as_array().unwrap().len(), 6);
    let i = d.interpolate(4).unwrap();
    assert_eq!(i["sequences"].as_array().unwrap().len(), 5);
    assert!(d.complete("run", 0).is_err());
}

#[test]
fn same_seed_same_losses() {
    let mut a = Demo::new(9).unwrap();
    let mut b = Demo::new(9).unwrap();
    assert_eq!(a.train(5).unwrap(), b.train(5).unwrap());
}
