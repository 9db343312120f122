"""
afcf/services — Стадии конвейера AFCF и харнесс.

    • dataset_service — проверка и уплотнение входных данных
    • fdas — справедливый отбор якорей (и абляции DAS / random)
    • anchor_clustering — запуск оператора F и проверка его контракта
    • fair_graph — справедливый якорный граф (ADMM + Frank-Wolfe)
    • propagation — перенос меток Y = ZᵀL
    • metrics — balance, MNCE, ACC, NMI, мягкий balance
    • pipeline / benchmark — оркестрация, масштабируемость, чувствительность
    • trace_logger — трасса сходимости в JSON lines
"""
