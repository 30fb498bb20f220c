#pragma once

// Generated by tools/gen_bessel_tables.py. Do not edit.
// Chebyshev coefficients of sqrt(x)*e^x K0, sqrt(x)*e^x K1, sqrt(x)*e^-x I0,
// sqrt(x)*e^-x I1 on consecutive subintervals of [2, 17].

#include <array>
#include <cstddef>

namespace welltest::bessel::detail {

inline constexpr std::size_t kChebyshevTerms = 18;

struct ChebyshevPiece {
    double lo, hi;
    std::array<std::array<double, kChebyshevTerms>, 4> coeffs;
};

inline const std::array<ChebyshevPiece, 8>& chebyshev_pieces() {
    static const std::array<ChebyshevPiece, 8> pieces{{
        {2.0, 2.6, {{
            {{1.1967684737208205, 6.2395536941059016e-3, -3.505215056516875e-4, 1.998914103151596e-5, -1.1543662395644783e-6, 6.7379126817277871e-8, -3.9688547014407396e-9, 2.3562212944595371e-10, -1.4084142905704518e-11, 8.469130913975303e-13, -5.1195749962519179e-14, 3.1092644139349552e-15, -1.8962341698276303e-16, 1.160783051557427e-17, -7.1297711071332719e-19, 4.3926640531419205e-20, -2.7138286261279548e-21, 1.6744536675262453e-22}},
            {{1.4380878498261977, -2.2050899071668496e-2, 1.3317045209189631e-3, -8.1201080542783597e-5, 4.9899490789927591e-6, -3.0860815440226519e-7, 1.9187997590905788e-8, -1.1983897333724341e-9, 7.5131718201397748e-11, -4.7257747151476459e-12, 2.9809752979214395e-13, -1.8850564851976193e-14, 1.1946546453617752e-15, -7.5858582583138624e-17, 4.8252574211409469e-18, -3.0740593986272916e-19, 1.9611305143720518e-20, -1.2476304116889861e-21}},
            {{4.3058226324633516e-1, -5.3611959358803601e-3, 3.4044535675338797e-4, -1.293052413674436e-5, -1.0934748184630478e-7, 6.488135720919049e-8, -6.484208821673821e-9, 4.6044674121314286e-10, -2.7637719529680267e-11, 1.5143746987969327e-12, -7.9576550875741403e-14, 4.1495705749243168e-15, -2.1927656503181495e-16, 1.1850388691908869e-17, -6.5555674182680008e-19, 3.7006536007771024e-20, -2.1232493673522806e-21, 1.2296603242580169e-22}},
            {{3.1809467604076793e-1, 1.2727743064208041e-2, -8.7816588044933631e-4, 4.9734506446321456e-5, -2.2127018797082797e-6, 7.0603960836982834e-8, -9.4285716056027038e-10, -6.9411113588467934e-11, 7.3977751735491934e-12, -4.6359034412689168e-13, 2.4117930227736138e-14, -1.1563396335823004e-15, 5.4055439263031501e-17, -2.5502685114802679e-18, 1.2363880512902608e-19, -6.1920444481896846e-21, 3.1961027656988211e-22, -1.6867117275472655e-23}},
        }}},
        {2.6, 3.3, {{
            {{1.2076539587493704, 4.7169544188915216e-3, -2.4680684872914469e-4, 1.3056262463710845e-5, -6.9721447627749024e-7, 3.7535547866112847e-8, -2.0351150240331559e-9, 1.1102586471248914e-10, -6.0901803615680079e-12, 3.356905847655061e-13, -1.8583362775560497e-14, 1.0327425646483366e-15, -5.7593884603362194e-17, 3.2220609129607939e-18, -1.8077551820635775e-19, 1.016916210721805e-20, -5.7341689666274301e-22, 3.2301834271849923e-23}},
            {{1.4001595452326806, -1.6180180064971147e-2, 8.9910863876048271e-4, -5.0317180667430168e-5, 2.8325727945697192e-6, -1.6025116157709317e-7, 9.1044535824488609e-9, -5.1913394110317231e-10, 2.9693852458496312e-11, -1.7031062166208879e-12, 9.7917682649766975e-14, -5.6416274323325066e-15, 3.256642605434707e-16, -1.8830940415480087e-17, 1.0905268251751441e-18, -6.3241121320121786e-20, 3.6719910376317355e-21, -2.1273300741936088e-22}},
            {{4.2164832899700608e-1, -3.6264162267946587e-3, 2.5848065188257119e-4, -1.472712954082434e-5, 5.7518829522174142e-7, -5.111682533008734e-9, -1.4968218442919122e-9, 1.6832927765464591e-10, -1.2284978374010422e-11, 7.3825138562093341e-13, -3.9685813513278365e-14, 2.0015265597418526e-15, -9.7955508549184492e-17, 4.7668405103212356e-18, -2.3428977778536534e-19, 1.171868828328077e-20, -5.9740468809297942e-22, 3.0898363640966913e-23}},
            {{3.3914964605310512e-1, 8.5341754472795575e-3, -5.8554464931967183e-4, 3.6087580928681499e-5, -1.9074981336188762e-6, 8.3367546434853574e-8, -2.8253592756170504e-9, 5.7899073990993724e-11, 9.1096761465955208e-13, -1.800181198340553e-13, 1.2510835952857001e-14, -6.721339080660923e-16, 3.2044735663824097e-17, -1.4426807344086041e-18, 6.3739511324811929e-20, -2.8340171578316648e-21, 1.2862700635011686e-22, -5.9769091774816386e-24}},
        }}},
        {3.3, 4.2, {{
            {{1.2163238535574918, 3.9609871995513302e-3, -2.1403092070294115e-4, 1.1657699881807856e-5, -6.394048602548865e-7, 3.5285814281323628e-8, -1.9578421568177985e-9, 1.0915605040934404e-10, -6.1120718808987978e-12, 3.4356529834885179e-13, -1.9379668948557415e-14, 1.0966235871487924e-15, -6.2232789331724998e-17, 3.5409772354521514e-18, -2.0196400693914895e-19, 1.1544833800407994e-20, -6.6127932314827612e-22, 3.7824523020344033e-23}},
            {{1.370768357963215, -1.3263365161623429e-2, 7.534703981571613e-4, -4.3025488827005565e-5, 2.4677585121543735e-6, -1.4207872189182158e-7, 8.2070268651327715e-9, -4.7543616469303839e-10, 2.7611979984912045e-11, -1.6072207841993201e-12, 9.3738803844066035e-14, -5.476943483365933e-15, 3.2051931783108169e-16, -1.8784519912320635e-17, 1.1023453714841118e-18, -6.4767352415717011e-20, 3.8094805855493849e-21, -2.2351710810751245e-22}},
            {{4.1549054064512532e-1, -2.5637948273727462e-3, 1.9708715497252375e-4, -1.3929948021073934e-5, 8.4158751350489566e-7, -3.9774045521600545e-8, 1.1255747002892792e-9, 2.6092263523563745e-11, -6.7706659193199899e-12, 6.2688284734502811e-13, -4.3970971236080651e-14, 2.6628917029806289e-15, -1.4732905276882125e-16, 7.7130557191364954e-18, -3.9210651376501039e-19, 1.9740177339749357e-20, -9.9780679777267579e-22, 5.0908991411996022e-23}},
            {{3.5387711018451447e-1, 6.2707828867688633e-3, -4.4161450005937215e-4, 3.0155761800712127e-5, -1.906375743724753e-6, 1.0763178115962723e-7, -5.2714525866390282e-9, 2.1546232735395364e-10, -6.6716418444643125e-12, 9.2370203566105365e-14, 6.5986983321525649e-15, -7.5545145146081754e-16, 5.0619823432687111e-17, -2.7961259582981419e-18, 1.3978347166818463e-19, -6.6270560422984913e-21, 3.0716788851748655e-22, -1.4186800754456931e-23}},
        }}},
        {4.2, 5.4, {{
            {{1.2236672459802236, 3.3796486486783815e-3, -1.9386398199325176e-4, 1.1183312215117778e-5, -6.4836976456579364e-7, 3.7759305431971455e-8, -2.2078844317945576e-9, 1.2957130016109637e-10, -7.6290947239649815e-12, 4.5054631606551836e-13, -2.6680544492416935e-14, 1.5839407053114027e-15, -9.4250556790979504e-17, 5.6201956840408874e-18, -3.3579308720445875e-19, 2.0099374233028031e-20, -1.2050977199531613e-21, 7.2107732342551477e-23}},
            {{1.3464289058298995, -1.1084070951520151e-2, 6.6250463385037784e-4, -3.9744139695964132e-5, 2.3919346814582824e-6, -1.4436054731446618e-7, 8.7343106953179589e-9, -5.2962619442495828e-10, 3.2178709067942079e-11, -1.958566928427057e-12, 1.1939971046964374e-13, -7.2894991397364582e-15, 4.456199274259593e-16, -2.727432819608938e-17, 1.6711757438660489e-18, -1.0250143406346883e-19, 6.2926984798515654e-21, -3.8519826892122032e-22}},
            {{4.1112226116816741e-1, -1.8341912781239112e-3, 1.4230060282761774e-4, -1.1068529329237327e-5, 8.2481583484096743e-7, -5.6109299530453273e-8, 3.3173578498717392e-9, -1.5807073306723692e-10, 4.7610854896743778e-12, 8.6865648830981669e-14, -2.8472390042146916e-14, 2.8995447193725689e-15, -2.2320231384712364e-16, 1.4855084569505158e-17, -9.0200694060705475e-19, 5.1558868966002673e-20, -2.837231845105461e-21, 1.525390504456252e-22}},
            {{3.6483354117629805e-1, 4.7365341935692746e-3, -3.3634544155033322e-4, 2.4187616194907698e-5, -1.718611764158754e-6, 1.169349477049343e-7, -7.4031205839347119e-9, 4.2590591968472336e-10, -2.1759267538619801e-11, 9.5381716502758184e-13, -3.3024441524222537e-14, 6.2163843056719306e-16, 2.6620516384639535e-17, -4.072002706086079e-18, 3.1616499864575278e-19, -1.9799176496663172e-20, 1.108993910009893e-21, -5.8056956145765769e-23}},
        }}},
        {5.4, 7.0, {{
            {{1.2298569585799455, 2.8130580496962663e-3, -1.6939756308484769e-4, 1.0240244206705707e-5, -6.2119882202696391e-7, 3.7803353806336841e-8, -2.3072173600206245e-9, 1.4118826717517193e-10, -8.6609669064428171e-12, 5.3248596505228288e-13, -3.2805710050343511e-14, 2.0249933200832519e-15, -1.2521918836582306e-16, 7.7559958467963038e-18, -4.8114408388446259e-19, 2.989095011767105e-20, -1.8594518857074581e-21, 1.1537190877810836e-22}},
            {{1.3263052427393393, -9.0628089592510283e-3, 5.6423256427814636e-4, -3.5216591074928993e-5, 2.2029880009743039e-6, -1.3808651004061141e-7, 8.6711624920766143e-9, -5.4539941387292329e-10, 3.4355588936831759e-11, -2.1670448268140231e-12, 1.3685968489922099e-13, -8.6531783779196695e-15, 5.4768228279349526e-16, -3.4697601782138464e-17, 2.2001715908032737e-18, -1.3962777593521851e-19, 8.8677401728544523e-21, -5.6132857278917288e-22}},
            {{4.0798593982604515e-1, -1.3264399041028144e-3, 9.9418572500199372e-5, -7.6309039177764716e-6, 5.9481615969673047e-7, -4.6102063895058321e-8, 3.4511544737200483e-9, -2.4196210352369157e-10, 1.5390774218692381e-11, -8.5135672770785018e-13, 3.7415750473205395e-14, -8.8083851502192503e-16, -5.2400518463230806e-17, 9.9686732223353384e-18, -9.8032611255270242e-19, 7.7345696766820128e-20, -5.398324339256059e-21, 3.4639672188327713e-22}},
            {{3.7311250190625245e-1, 3.5846976358884573e-3, -2.5206890275685036e-4, 1.8016759954848251e-5, -1.3070229430418085e-6, 9.532930473110471e-8, -6.8721789314899463e-9, 4.7970797780228076e-10, -3.179139878152437e-11, 1.965785187209569e-12, -1.1153183975728131e-13, 5.685370379080362e-15, -2.5069464218876387e-16, 8.6534272860417006e-18, -1.3700252731811226e-19, -1.1601868771709772e-20, 1.5852687223178874e-21, -1.2791879784253143e-22}},
        }}},
        {7.0, 9.2, {{
            {{1.2350192433483963, 2.3475247132587793e-3, -1.5103006274208679e-4, 9.7414013305399694e-6, -6.2979169510975055e-7, 4.08048623774223e-8, -2.6490892879622611e-9, 1.7230119425955959e-10, -1.1226142453312701e-11, 7.3260927677807911e-13, -4.7881498831008335e-14, 3.1338241930371773e-15, -2.0537849686084644e-16, 1.3476402987843163e-17, -8.8531921335741146e-19, 5.8224196067658058e-20, -3.8330981450395386e-21, 2.5150339721101229e-22}},
            {{1.3097969670830347, -7.449514095055825e-3, 4.9216033306101172e-4, -3.2569268693078945e-5, 2.1585741082724007e-6, -1.4326040019275633e-7, 9.519957301676811e-9, -6.3335711716928801e-10, 4.2182009101111688e-11, -2.8121290701931316e-12, 1.8764663500941497e-13, -1.25318520606593e-14, 8.3759278793625272e-16, -5.6023536848560536e-17, 3.7497901471960529e-18, -2.5114415120079329e-19, 1.6830333349149166e-20, -1.1234820150732298e-21}},
            {{4.0567034028699209e-1, -1.0002619410230127e-3, 7.5057295379130477e-5, -5.7024311370116478e-6, 4.4004873410442427e-7, -3.4538857542103067e-8, 2.7480611584977548e-9, -2.1945848776770983e-10, 1.7317571569981786e-11, -1.3253016963036018e-12, 9.6462772468761817e-14, -6.5411225105226747e-15, 4.0252450657442906e-16, -2.1469266668606622e-17, 8.7816239769357676e-19, -1.2222472932960197e-20, -2.5378783081096394e-21, 3.8047964282740644e-22}},
            {{3.7946549420066531e-1, 2.7872915517252945e-3, -2.0057973376371092e-4, 1.4543407546844814e-5, -1.0649257862517313e-6, 7.8900937112066179e-8, -5.9143912076422515e-9, 4.4678162326413475e-10, -3.3725543484029188e-11, 2.5136212189230146e-12, -1.8251342551210177e-13, 1.2742867140464179e-14, -8.4517886598895679e-16, 5.2619763627484609e-17, -3.0321178854509671e-18, 1.5827113319035278e-19, -7.1667272284748672e-21, 2.4939354845500687e-22}},
        }}},
        {9.2, 12.5, {{
            {{1.2394129253964475, 2.0281335652389963e-3, -1.4819954640441241e-4, 1.0846380305233472e-5, -7.9499805271377146e-7, 5.8351253468358804e-8, -4.2884497716275453e-9, 3.1556058074426834e-10, -2.3246979100457044e-11, 1.7144438360231364e-12, -1.265688465335929e-13, 9.3530467886124531e-15, -6.9179888652366105e-16, 5.1213738887877705e-17, -3.7944941827610835e-18, 2.813612545102907e-19, -2.0877965077906016e-20, 1.5418544155108837e-21}},
            {{1.2959445073740297, -6.3524895380423593e-3, 4.7383332353156416e-4, -3.5379965635985069e-5, 2.6442741742938369e-6, -1.9780770230966893e-7, 1.4809513319354396e-8, -1.1096218781412232e-9, 8.3200103751547356e-11, -6.2426262419664149e-12, 4.6869157254359287e-13, -3.5210047006339407e-14, 2.6466128644160789e-15, -1.990419173009924e-16, 1.4976697951093461e-17, -1.1274388923576201e-18, 8.4908386784942199e-20, -6.3612881137504774e-21}},
            {{4.0386840636442725e-1, -8.0033735214492457e-4, 6.5269372947241348e-5, -5.3476389091111881e-6, 4.4062864049143322e-7, -3.6563513641846015e-8, 3.0609268257328682e-9, -2.5898801254878936e-10, 2.2172700154742357e-11, -1.919407696352025e-12, 1.6740556577589855e-13, -1.46100984901534e-14, 1.2637645356243421e-15, -1.0714193732023328e-16, 8.798048435879724e-18, -6.9112275153624167e-19, 5.1205885622645981e-20, -3.4991234264225475e-21}},
            {{3.8454018509838066e-1, 2.2781892197078688e-3, -1.8062892951368956e-4, 1.4362997921589297e-5, -1.1461304187751515e-6, 9.1860706293865208e-8, -7.4034030173655894e-9, 6.0079776034977319e-10, -4.9154455993497035e-11, 4.0565903390696251e-12, -3.3735187597801566e-13, 2.8179815822848029e-14, -2.3513919936520466e-15, 1.945565007314679e-16, -1.583002655502444e-17, 1.2558754521235017e-18, -9.635294043989953e-20, 7.0593931693272956e-21}},
        }}},
        {12.5, 17.0, {{
            {{1.2429589002892465, 1.5332141959611884e-3, -1.1361761687069215e-4, 8.4274473066717765e-6, -6.2565233443102412e-7, 4.6487626879063009e-8, -3.4569330258757874e-9, 2.5726285269773125e-10, -1.9159320673221029e-11, 1.4278594703972956e-12, -1.0648281897575662e-13, 7.9460186656157111e-15, -5.9331270357864155e-16, 4.4327224226177147e-17, -3.3135973012884538e-18, 2.4783420954388036e-19, -1.8545235328358061e-20, 1.3807034891536823e-21}},
            {{1.2848952119181987, -4.7509937436375075e-3, 3.5759839591310424e-4, -2.6932301639484938e-5, 2.0295642244385517e-6, -1.5302746593595235e-7, 1.1544102432209239e-8, -8.7129071818104439e-10, 6.5791072849319534e-11, -4.9700580987286112e-12, 3.7560984971393351e-13, -2.8397790973934438e-14, 2.1478102397176752e-15, -1.6250370679840617e-16, 1.2299272146039181e-17, -9.3118823654368168e-19, 7.052077336920679e-20, -5.3119404075822611e-21}},
            {{4.02507771499285e-1, -5.7084684750193195e-4, 4.5778658993289718e-5, -3.6783987296504345e-6, 2.9621108425242176e-7, -2.391144872271871e-8, 1.9356058353504013e-9, -1.5718816395063769e-10, 1.2813178232169384e-11, -1.0491631029717427e-12, 8.6371917207161025e-14, -7.1564582928398568e-15, 5.973920831449714e-16, -5.0274307641531432e-17, 4.264860729970997e-18, -3.6420048314445212e-19, 3.1215046030401127e-20, -2.6544950327974858e-21}},
            {{3.8844168949308201e-1, 1.6497990344776738e-3, -1.2975109886367591e-4, 1.0217298564676757e-5, -8.0569087264268605e-7, 6.3633171896203403e-8, -5.03471566962562e-9, 3.9917313062499441e-10, -3.1724633844825243e-11, 2.5286119944627016e-12, -2.0224456703833313e-13, 1.6244149046236361e-14, -1.3112709502633639e-15, 1.0645943649776779e-16, -8.6967135118510601e-18, 7.1467309917643314e-19, -5.9006778372946098e-20, 4.8507304392257934e-21}},
        }}},
    }};
    return pieces;
}

}  // namespace welltest::bessel::detail
