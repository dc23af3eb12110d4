// Reference polynomials for the two worked examples, z0 standing for the discount.

// Switching controller game.
pub const E1F1: &str = "38/5*z2*z0 + 22/5*z1*z0 - 12*z1 + 32";
pub const E1F2: &str = "-99/20*z2*z0 + 9*z2 - 81/20*z1*z0";
pub const E1G1: &str = "5*z1*z0^2 + 55*z1*z0 - 60*z1 - 88*z0 + 160";
pub const E1G2: &str = "5*z2*z0^2 + 55*z2*z0 - 60*z2 + 72*z0";

// Reward-diagonal game.
pub const E2F1: &str = "7/375*z2^3*z0^3 - 11/375*z2^2*z1*z0^3 - 2/75*z2^2*z1*z0^2 - 44/5*z2^2*z0^2 + 1/375*z2*z1^2*z0^3 + 4/75*z2*z1^2*z0^2 - 1/5*z2*z1*z0^2 + 89/5*z2*z1*z0 - 252*z2*z0 + 1/125*z1^3*z0^3 - 2/75*z1^3*z0^2 + 9*z1^2*z0^2 - 89/5*z1^2*z0 - 144*z1*z0 + 396*z1 - 1296";
pub const E2F2: &str = "-29/500*z2^3*z0^3 + 3/25*z2^3*z0^2 + 27/500*z2^2*z1*z0^3 - 6/25*z2^2*z1*z0^2 - 131/100*z2^2*z0^2 + 2*z2^2*z0 + 33/500*z2*z1^2*z0^3 + 3/25*z2*z1^2*z0^2 + 31/50*z2*z1*z0^2 - 2*z2*z1*z0 - 47/5*z2*z0 + 11*z2 - 31/500*z1^3*z0^3 + 69/100*z1^2*z0^2 - 8/5*z1*z0 - 6";
pub const E2G1: &str = "573788072*z1^5*z0^8 - 220687720*z1^5*z0^7 - 7503382480*z1^5*z0^6 + 20744645680*z1^5*z0^5 - 23613586040*z1^5*z0^4 + 12667475128*z1^5*z0^3 - 2648252640*z1^5*z0^2 + 17339824845*z1^4*z0^7 + 777484096540*z1^4*z0^6 - 5051043271810*z1^4*z0^5 + 12082535624940*z1^4*z0^4 - 13976285582035*z1^4*z0^3 + 7917677944720*z1^4*z0^2 - 1767708637200*z1^4*z0 - 132203187917*z1^3*z0^6 - 4061892203389*z1^3*z0^5 + 41976312974469*z1^3*z0^4 - 139562105527903*z1^3*z0^3 + 209430408589540*z1^3*z0^2 - 146977072348800*z1^3*z0 + 39326551704000*z1^3 + 4540064732898*z1^2*z0^5 - 32189023528776*z1^2*z0^4 + 111423218218458*z1^2*z0^3 - 210428562654180*z1^2*z0^2 + 192643241103600*z1^2*z0 - 65988937872000*z1^2 - 36494410557024*z1*z0^4 + 197044804007424*z1*z0^3 - 329307266563200*z1*z0^2 + 153965516032800*z1*z0 + 14791357080000*z1 + 89067118187808*z0^3 - 570684050648640*z0^2 + 1146714437289600*z0 - 720144590112000";
pub const E2G2: &str = "573788072*z2^5*z0^8 - 220687720*z2^5*z0^7 - 7503382480*z2^5*z0^6 + 20744645680*z2^5*z0^5 - 23613586040*z2^5*z0^4 + 12667475128*z2^5*z0^3 - 2648252640*z2^5*z0^2 - 204848895*z2^4*z0^7 - 858363627960*z2^4*z0^6 + 3391365456790*z2^4*z0^5 - 4977728569660*z2^4*z0^4 + 3171701981265*z2^4*z0^3 - 682632847540*z2^4*z0^2 - 44137544000*z2^4*z0 - 428935189842*z2^3*z0^6 - 27966474140289*z2^3*z0^5 + 100992652545319*z2^3*z0^4 - 130647004403803*z2^3*z0^3 + 72083867190015*z2^3*z0^2 - 13791349509400*z2^3*z0 - 242756492000*z2^3 - 11840380819272*z2^2*z0^5 - 294095993630166*z2^2*z0^4 + 1011540632651148*z2^2*z0^3 - 1175534529822210*z2^2*z0^2 + 552033040308000*z2^2*z0 - 82102768687500*z2^2 - 150578129579184*z2*z0^4 - 965930452772256*z2*z0^3 + 3604616402786640*z2*z0^2 - 3768621176239200*z2*z0 + 1280513355804000*z2 - 737655098899392*z0^3 + 906896369212560*z0^2 + 449706809325600*z0 - 673995164922000";
pub const E2Q1: &str = "-733786669/32*z1^5 - 5359807932115/128*z1^4 + 207671951406997/64*z1^3 - 163463882465331/16*z1^2 + 31796998296714*z1 - 278324994355884";
pub const E2Q2: &str = "-733786669/32*z2^5 - 1895121071975/128*z2^4 - 33907289629/2*z2^3 + 61773492718827/8*z2^2 + 167204428685829*z2 - 314624555318484";
