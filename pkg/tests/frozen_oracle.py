"""Oracle outputs pinned by gen_frozen.py; do not edit by hand."""

# fmt: off

CORR = {
    4: {'pearson': 0.8302597009930546, 'spearman': 0.8},
    20: {'pearson': 0.7562501878075171, 'spearman': 0.6177028425439942},
    100: {'pearson': 0.8875125874558321, 'spearman': 0.8822754617138333},
    1000: {'pearson': 0.8934839169993849, 'spearman': 0.9017189385272317},
    5000: {'pearson': 0.8837774317820236, 'spearman': 0.8918473012854244},
}

OLS = {
    4: {
        'beta': [0.9999999999999998, 1.0000000000000002],
        'r2': 0.9881422924901185,
        'leverage_head': [0.7, 0.3, 0.3],
        'leverage_sum': 2.0,
        'hc3_diag': [0.0328798185941043, 0.011020408163265298],
        'hc3_01': -0.01768707482993196,
        'classical_diag': [0.04500000000000001, 0.006000000000000002],
        'bp_lm': 0.7999999999999987,
        'bp_p': 0.37109336952269795,
        'infer_beta': 1.0000000000000002,
        'infer_se': 0.10497813183356473,
        'infer_p': 0.010841516847612387,
        'infer_ci': [0.5483155545023137, 1.4516844454976865],
    },
    20: {
        'beta': [5.482195449645017, 0.012867913143092451, 0.04000232391655917, 9.555334208158966],
        'r2': 0.9799063709461234,
        'leverage_head': [0.2350670808636452, 0.18852312296988535, 0.16312964182634307],
        'leverage_sum': 4.0,
        'hc3_diag': [0.08472038191167865, 1.7357127985424237e-05, 6.145744477220613e-05, 0.4897558562824304],
        'hc3_01': -0.000566042014757642,
        'classical_diag': [0.1041676792221135, 9.463943340124894e-06, 3.082060903456881e-05, 0.17531907604842356],
        'bp_lm': 2.113415337590935,
        'bp_p': 0.5492035206518533,
        'infer_beta': 0.012867913143092451,
        'infer_se': 0.0041661886641658746,
        'infer_p': 0.007045319204377779,
        'infer_ci': [0.004035987716371693, 0.02169983856981321],
    },
    100: {
        'beta': [7.044617566756663, 0.010554122188271113, 0.013965483794900006, 8.518547152847427],
        'r2': 0.6421818451852891,
        'leverage_head': [0.04429644792418623, 0.039471901945195495, 0.05007741905391231],
        'leverage_sum': 4.0,
        'hc3_diag': [0.6971191871135671, 4.5933504548796415e-05, 0.0001655176400488107, 0.43237739591688384],
        'hc3_01': -0.0036816072513370496,
        'classical_diag': [0.4767806414009472, 2.8253289588602754e-05, 0.0001465960947096084, 0.43050786752416736],
        'bp_lm': 16.241332974539553,
        'bp_p': 0.0010118353422856718,
        'infer_beta': 0.010554122188271113,
        'infer_se': 0.006777426100578037,
        'infer_p': 0.12270269590597833,
        'infer_ci': [-0.002898962293879114, 0.024007206670421343],
    },
    1000: {
        'beta': [6.058971934118257, 0.013867955815625325, 0.03057824592556413, 9.004630105998833],
        'r2': 0.6576600419453819,
        'leverage_head': [0.002279969091199342, 0.0024200507908387608, 0.0031138193334901516],
        'leverage_sum': 4.0,
        'hc3_diag': [0.031747282824740576, 3.0043968569339313e-06, 1.0235373369454965e-05, 0.046948667455212846],
        'hc3_01': -0.0001682943181327137,
        'classical_diag': [0.038468575607967036, 2.595008526319506e-06, 1.1584666892347885e-05, 0.04548310084763146],
        'bp_lm': 146.19605609943716,
        'bp_p': 1.742923821200157e-31,
        'infer_beta': 0.013867955815625325,
        'infer_se': 0.0017333196061124823,
        'infer_p': 3.4189441796051088e-15,
        'infer_ci': [0.010466578459888479, 0.017269333171362172],
    },
    5000: {
        'beta': [6.042775436547837, 0.014758975283150951, 0.02957392813675871, 8.956140149824776],
        'r2': 0.6509974517133218,
        'leverage_head': [0.0005178563718351642, 0.0005306940670047021, 0.0012092363115526303],
        'leverage_sum': 4.0,
        'hc3_diag': [0.00613176500362536, 6.236699178891707e-07, 2.5001962352423075e-06, 0.00945845856746507],
        'hc3_01': -2.2898987914315485e-05,
        'classical_diag': [0.007556696744619793, 5.31176498622101e-07, 2.5085641809949584e-06, 0.009366960791121027],
        'bp_lm': 695.2064323836886,
        'bp_p': 2.2985905913980288e-150,
        'infer_beta': 0.014758975283150951,
        'infer_se': 0.000789727749220686,
        'infer_p': 2.162861302279303e-75,
        'infer_ci': [0.013210762258091703, 0.0163071883082102],
    },
}

AD = {
    8: {'a2_adj': 1.1480479770681364, 'p': 0.005321549079002529},
    20: {'a2_adj': 0.21187129436076738, 'p': 0.8564884362448864},
    100: {'a2_adj': 1.3346115798795908, 'p': 0.0018501891322913332},
    1000: {'a2_adj': 4.325579579939796, 'p': 9.732006384207964e-11},
    5000: {'a2_adj': 19.046582724374723, 'p': 0.0},
}

AD_EXTRA = {
    'low': {'a2_adj': 0.1628213957182241, 'p': 0.9449496394100131},
    'mid': {'a2_adj': 0.530459191052311, 'p': 0.17544163172353328},
}
# fmt: on
